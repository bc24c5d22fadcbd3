#include "kinlab/boltz/dsmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinlab/boltz/frequency.hpp"
#include "kinlab/errors.hpp"
#include "kinlab/md/collision.hpp"
#include "kinlab/torus.hpp"

namespace kinlab::boltz {
namespace {

int cell_of(double coord, double w, int n) {
  int c = static_cast<int>(coord / w);
  if (c < 0) c = 0;
  if (c >= n) c = n - 1;
  return c;
}

}  // namespace

double estimate_mean_free_time(const DistributionState& state) {
  double mean_speed = 0.0;
  for (const auto& v : state.vel) mean_speed += norm(v);
  mean_speed /= static_cast<double>(state.size());
  // E|v - v*| ~= sqrt(2) * mean speed; number density is 1/lambda^3
  const double rate = state.gamma * kPi * std::sqrt(2.0) * mean_speed /
                      (state.lambda * state.lambda * state.lambda);
  return 1.0 / rate;
}

DistributionState make_dsmc_state(const ens::DensitySpec& f_in, std::size_t n_samples,
                                  double lambda, double gamma, int cells_per_axis,
                                  RandomStream& rng) {
  if (n_samples < 2) throw std::invalid_argument("make_dsmc_state: need at least 2 samples");
  DistributionState st;
  st.lambda = lambda;
  st.gamma = gamma;
  st.pos.resize(n_samples);
  st.vel.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    if (f_in.position_profile) {
      for (;;) {
        const Vec3 x{rng.uniform(0.0, lambda), rng.uniform(0.0, lambda),
                     rng.uniform(0.0, lambda)};
        if (rng.uniform() * f_in.profile_sup <= f_in.profile(x)) {
          st.pos[i] = x;
          break;
        }
      }
    } else {
      st.pos[i] = {rng.uniform(0.0, lambda), rng.uniform(0.0, lambda), rng.uniform(0.0, lambda)};
    }
    st.vel[i] = f_in.vlaw.sample(f_in.beta, rng);
  }

  if (cells_per_axis <= 0) {
    const KineticParams p{f_in.vlaw.matched_beta(f_in.beta), gamma};
    const double target = 0.5 * mean_free_path(p);
    int n = std::max(1, static_cast<int>(std::floor(lambda / target)));
    // keep >= 20 samples per cell on average
    while (n > 1 && static_cast<double>(n_samples) / (static_cast<double>(n) * n * n) < 20.0)
      --n;
    cells_per_axis = n;
  }
  st.cells_per_axis = cells_per_axis;

  double vmax = 0.0;
  for (const auto& v : st.vel) vmax = std::fmax(vmax, norm(v));
  const std::size_t ncells = static_cast<std::size_t>(cells_per_axis) * cells_per_axis *
                             cells_per_axis;
  st.majorant.assign(ncells, 2.4 * vmax + 1e-12);
  st.carry.assign(ncells, 0.0);
  return st;
}

DistributionState dsmc_step(DistributionState st, double dt, RandomStream& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("dsmc_step: dt must be > 0");
  if (dt > 0.25 * estimate_mean_free_time(st))
    throw std::invalid_argument("dsmc_step: dt exceeds 0.2 x mean free time estimate");

  const int nc = st.cells_per_axis;
  const double w = st.lambda / nc;
  const std::size_t ncells = static_cast<std::size_t>(nc) * nc * nc;
  if (st.majorant.size() != ncells) st.majorant.assign(ncells, 0.0);
  if (st.carry.size() != ncells) st.carry.assign(ncells, 0.0);

  // bucket samples by cell
  std::vector<std::vector<std::uint32_t>> members(ncells);
  for (std::size_t i = 0; i < st.size(); ++i) {
    const int a = cell_of(st.pos[i].x, w, nc);
    const int b = cell_of(st.pos[i].y, w, nc);
    const int c = cell_of(st.pos[i].z, w, nc);
    members[(static_cast<std::size_t>(a) * nc + b) * nc + c].push_back(
        static_cast<std::uint32_t>(i));
  }
  for (auto& m : st.majorant)
    if (m <= 0.0) m = 1e-12;

  const double cell_vol = w * w * w;
  const double m_total = static_cast<double>(st.size());

  const std::vector<Vec3> vel_snapshot = st.vel;
  const std::vector<double> carry_snapshot = st.carry;
  for (int attempt = 0; attempt < 64; ++attempt) {
    bool violated = false;
    for (std::size_t c = 0; c < ncells; ++c) {
      const auto& mem = members[c];
      if (mem.size() < 2) continue;
      const double npairs = static_cast<double>(mem.size()) *
                            (static_cast<double>(mem.size()) - 1.0);
      double cand = npairs * st.gamma * kPi * st.majorant[c] * dt / (2.0 * m_total * cell_vol) +
                    st.carry[c];
      const long n_cand = static_cast<long>(cand);
      st.carry[c] = cand - static_cast<double>(n_cand);
      for (long q = 0; q < n_cand; ++q) {
        const std::size_t ii = rng.below(mem.size());
        std::size_t jj = rng.below(mem.size() - 1);
        if (jj >= ii) ++jj;
        const std::uint32_t i = mem[ii], j = mem[jj];
        const Vec3 u = st.vel[i] - st.vel[j];
        const double rel = norm(u);
        if (rel > st.majorant[c]) {
          // every violating cell gets its bound raised before the step retry
          st.majorant[c] = std::fmax(2.0 * st.majorant[c], 1.05 * rel);
          violated = true;
          break;
        }
        if (violated) continue;  // keep doubling scan cheap after a violation
        if (rng.uniform() * st.majorant[c] > rel) continue;
        // cos-weighted hemisphere normal around the relative velocity
        Vec3 e1, e2;
        orthonormal_frame(u, e1, e2);
        const double ct = std::sqrt(rng.uniform());
        const double stt = std::sqrt(std::fmax(0.0, 1.0 - ct * ct));
        const double phi = 2.0 * kPi * rng.uniform();
        const Vec3 n = ct * (1.0 / rel) * u + stt * (std::cos(phi) * e1 + std::sin(phi) * e2);
        const auto [vi, vj] = md::apply_collision(st.vel[i], st.vel[j], n);
        st.vel[i] = vi;
        st.vel[j] = vj;
      }
    }
    if (!violated) break;
    st.vel = vel_snapshot;  // majorant doubled: redo the whole step
    st.carry = carry_snapshot;
    if (attempt == 63) throw MajorantOverflow("dsmc_step: majorant kept overflowing");
  }

  // free streaming
  const TorusGeometry geom{st.lambda};
  for (std::size_t i = 0; i < st.size(); ++i) st.pos[i] = geom.wrap(st.pos[i] + dt * st.vel[i]);
  st.time += dt;
  return st;
}

}  // namespace kinlab::boltz
