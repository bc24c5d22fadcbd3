#include "kinlab/ensemble/samplers.hpp"

#include <string>

#include "kinlab/torus.hpp"

namespace kinlab::ens {
namespace {

constexpr int kRestartAfter = 10'000;
constexpr long kStallAfter = 1'000'000;

Vec3 uniform_position(double lambda, RandomStream& rng) {
  return {rng.uniform(0.0, lambda), rng.uniform(0.0, lambda), rng.uniform(0.0, lambda)};
}

// position from a bounded profile by rejection against its sup
Vec3 profile_position(const DensitySpec& spec, double lambda, RandomStream& rng) {
  for (long tries = 0; tries < kStallAfter; ++tries) {
    const Vec3 x = uniform_position(lambda, rng);
    if (rng.uniform() * spec.profile_sup <= spec.profile(x)) return x;
  }
  throw RejectionStall("profile_position: acceptance below 1e-6");
}

// broad phase for the insertion rejection: overlap candidates live in
// neighboring cells once the cell side is >= 2r
class InsertionGrid {
 public:
  InsertionGrid(double lambda, double radius, std::size_t n)
      : geom_{lambda} {
    const int cap = std::max<int>(3, static_cast<int>(std::cbrt(static_cast<double>(n))) + 2);
    int nc = radius > 0.0 ? static_cast<int>(std::floor(lambda / (2.0 * radius))) : cap;
    nc = std::min(nc, cap);
    nc_ = nc >= 3 ? nc : 1;
    h_ = lambda / nc_;
    cells_.assign(static_cast<std::size_t>(nc_) * nc_ * nc_, {});
  }

  void reset() {
    for (auto& c : cells_) c.clear();
    placed_.clear();
  }

  bool clear_of(const Vec3& x, double two_r) const {
    if (nc_ == 1) {
      for (const auto& p : placed_)
        if (geom_.distance(p, x) < two_r) return false;
      return true;
    }
    const int a0 = cell_of(x.x), b0 = cell_of(x.y), c0 = cell_of(x.z);
    for (int a = a0 - 1; a <= a0 + 1; ++a)
      for (int b = b0 - 1; b <= b0 + 1; ++b)
        for (int c = c0 - 1; c <= c0 + 1; ++c) {
          const std::size_t idx = index((a % nc_ + nc_) % nc_, (b % nc_ + nc_) % nc_,
                                        (c % nc_ + nc_) % nc_);
          for (const int j : cells_[idx])
            if (geom_.distance(placed_[static_cast<std::size_t>(j)], x) < two_r) return false;
        }
    return true;
  }

  void insert(const Vec3& x) {
    const int j = static_cast<int>(placed_.size());
    placed_.push_back(x);
    if (nc_ > 1) cells_[index(cell_of(x.x), cell_of(x.y), cell_of(x.z))].push_back(j);
    else cells_[0].push_back(j);
  }

 private:
  int cell_of(double coord) const {
    int c = static_cast<int>(coord / h_);
    if (c < 0) c = 0;
    if (c >= nc_) c = nc_ - 1;
    return c;
  }
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * nc_ + b) * nc_ + c;
  }

  TorusGeometry geom_;
  int nc_ = 1;
  double h_ = 1.0;
  std::vector<std::vector<int>> cells_;
  std::vector<Vec3> placed_;
};

// sequential insertion; draw_position(i) supplies the proposal for slot i
template <typename DrawPos>
std::vector<Vec3> place_spheres(std::size_t n, double radius, double lambda, DrawPos&& draw) {
  const double two_r = 2.0 * radius;
  std::vector<Vec3> pos(n);
  std::vector<long> total_tries(n, 0);
  InsertionGrid grid(lambda, radius, n);
  std::size_t i = 0;
  int consecutive = 0;
  while (i < n) {
    const Vec3 x = draw(i);
    if (grid.clear_of(x, two_r)) {
      pos[i] = x;
      grid.insert(x);
      ++i;
      consecutive = 0;
      continue;
    }
    if (++total_tries[i] >= kStallAfter)
      throw PackingStall("could not place particle " + std::to_string(i) + " after 1e6 tries");
    if (++consecutive >= kRestartAfter) {
      i = 0;  // wedged: restart the whole configuration
      grid.reset();
      consecutive = 0;
    }
  }
  return pos;
}

}  // namespace

md::PhasePoint sample_equilibrium(const ScalingParams& scaling, double beta, RandomStream& rng) {
  md::PhasePoint s;
  s.radius = scaling.radius;
  s.time = 0.0;
  s.pos = place_spheres(
      scaling.n_particles, scaling.radius, scaling.lambda,
      [&](std::size_t) { return uniform_position(scaling.lambda, rng); });
  s.vel.resize(scaling.n_particles);
  for (auto& v : s.vel) v = sample_maxwellian(beta, rng);
  return s;
}

md::PhasePoint sample_chaotic(const DensitySpec& f_in, const ScalingParams& scaling,
                              RandomStream& rng) {
  f_in.validate();
  md::PhasePoint s;
  s.radius = scaling.radius;
  s.time = 0.0;
  s.pos = place_spheres(
      scaling.n_particles, scaling.radius, scaling.lambda,
      [&](std::size_t) { return profile_position(f_in, scaling.lambda, rng); });
  s.vel.resize(scaling.n_particles);
  for (auto& v : s.vel) v = f_in.vlaw.sample(f_in.beta, rng);
  return s;
}

md::PhasePoint sample_tagged(const DensitySpec& phi_in, const ScalingParams& scaling,
                             RandomStream& rng) {
  phi_in.validate();
  md::PhasePoint s;
  s.radius = scaling.radius;
  s.time = 0.0;
  s.pos = place_spheres(
      scaling.n_particles, scaling.radius, scaling.lambda,
      [&](std::size_t i) {
        return i == 0 ? profile_position(phi_in, scaling.lambda, rng)
                      : uniform_position(scaling.lambda, rng);
      });
  s.vel.resize(scaling.n_particles);
  for (auto& v : s.vel) v = sample_maxwellian(phi_in.beta, rng);
  return s;
}

}  // namespace kinlab::ens
