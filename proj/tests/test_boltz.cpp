#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kinlab/boltz/dsmc.hpp"
#include "kinlab/boltz/entropy.hpp"
#include "kinlab/boltz/frequency.hpp"
#include "kinlab/boltz/io.hpp"
#include "kinlab/boltz/jump_process.hpp"
#include "kinlab/ensemble/histogram.hpp"
#include "kinlab/quadrature.hpp"

using namespace kinlab;
using namespace kinlab::boltz;

namespace {

// deterministic quadrature oracle for E_{v* ~ M_beta} |v - v*| via a 3-d
// Gauss-Hermite product rule (independent of the closed form in the library)
double mean_relative_speed_quadrature(const Vec3& v, double beta) {
  const GaussRule gh = gauss_hermite(24);
  const double scale = std::sqrt(2.0 / beta);
  double sum = 0.0;
  for (std::size_t a = 0; a < gh.nodes.size(); ++a)
    for (std::size_t b = 0; b < gh.nodes.size(); ++b)
      for (std::size_t c = 0; c < gh.nodes.size(); ++c) {
        const Vec3 w{scale * gh.nodes[a], scale * gh.nodes[b], scale * gh.nodes[c]};
        sum += gh.weights[a] * gh.weights[b] * gh.weights[c] * norm(v - w);
      }
  return sum / std::pow(kPi, 1.5);
}

}  // namespace

TEST_CASE("collision_frequency: closed form vs quadrature oracle") {
  // nu(0) at beta = 8 pi, gamma = 1 equals 1 exactly
  CHECK(collision_frequency({0, 0, 0}, {8.0 * kPi, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));

  for (const double beta : {0.7, 1.0, 3.0}) {
    const KineticParams p{beta, 1.3};
    for (const double speed : {0.0, 0.3, 1.0, 2.5}) {
      const Vec3 v{speed, 0, 0};
      const double oracle = p.gamma * kPi * mean_relative_speed_quadrature(v, beta);
      CHECK(collision_frequency(v, p) == doctest::Approx(oracle).epsilon(2e-3));
    }
  }
}

TEST_CASE("collision_frequency: monotone in |v| and linear asymptote") {
  const KineticParams p{1.0, 1.0};
  CHECK(collision_frequency({2, 0, 0}, p) > collision_frequency({1, 0, 0}, p));
  CHECK(collision_frequency({1, 0, 0}, p) > collision_frequency({0, 0, 0}, p));
  const Vec3 big{20.0, 0, 0};
  CHECK(collision_frequency(big, p) / (p.gamma * kPi * norm(big)) ==
        doctest::Approx(1.0).epsilon(0.02));
  // the thinning majorant dominates
  RandomStream rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = 3.0 * rng.normal3();
    CHECK(collision_frequency(v, p) <= frequency_majorant(v, p));
  }
}

TEST_CASE("mean collision rate: 4 gamma sqrt(pi/beta)") {
  const KineticParams p{2.0, 0.5};
  CHECK(mean_collision_rate(p) == doctest::Approx(4.0 * 0.5 * std::sqrt(kPi / 2.0)).epsilon(1e-14));
  CHECK(mean_free_time(p) == doctest::Approx(1.0 / mean_collision_rate(p)));
}

TEST_CASE("sample_post_collision conserves pair energy and is isotropic at v=0") {
  const KineticParams p{1.0, 1.0};
  RandomStream rng(11);
  Vec3 mean_out;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = i % 2 ? Vec3{1.0, -0.5, 2.0} : Vec3{0, 0, 0};
    const PostCollisionDraw d = sample_post_collision_draw(v, p, rng);
    CHECK(std::fabs(norm2(d.v_out) + norm2(d.v_star_out) - norm2(v) - norm2(d.v_star)) <= 1e-12);
    if (!(i % 2)) mean_out += d.v_out;
  }
  mean_out *= 2.0 / n;
  // rotational symmetry of the kernel at v = 0
  CHECK(std::fabs(mean_out.x) < 0.05);
  CHECK(std::fabs(mean_out.y) < 0.05);
  CHECK(std::fabs(mean_out.z) < 0.05);
}

TEST_CASE("jump process: horizon zero and jump counts") {
  const KineticParams p{1.0, 1.0};
  RandomStream rng(13);
  const JumpPath empty = simulate_jump_path({0.1, 0.2, 0.3}, {1, 0, 0}, 0.0, p, rng);
  CHECK(empty.jumps.empty());
  CHECK(empty.position_at(0.0) == Vec3{0.1, 0.2, 0.3});

  // mean jump count over [0, T] with v0 ~ M_beta is T * E[nu]
  const double T = 5.0 * mean_free_time(p);
  double jumps = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const Vec3 v0 = sample_maxwellian(p.beta, rng);
    jumps += static_cast<double>(simulate_jump_path({0, 0, 0}, v0, T, p, rng).jumps.size());
  }
  jumps /= n;
  const double expect = T * mean_collision_rate(p);
  CHECK(jumps == doctest::Approx(expect).epsilon(0.04));
}

TEST_CASE("jump process: velocity law relaxes to the Maxwellian") {
  const KineticParams p{1.0, 1.0};
  RandomStream rng(17);
  const double T = 10.0 * mean_free_time(p);
  Vec3 mean, var;
  const int n = 6000;
  for (int i = 0; i < n; ++i) {
    // start far from equilibrium
    const JumpPath path = simulate_jump_path({0, 0, 0}, {3.0, 0, 0}, T, p, rng);
    const Vec3 v = path.velocity_at(T);
    mean += v;
    var += {v.x * v.x, v.y * v.y, v.z * v.z};
  }
  mean *= 1.0 / n;
  var *= 1.0 / n;
  CHECK(std::fabs(mean.x) < 0.06);
  CHECK(var.x == doctest::Approx(1.0).epsilon(0.08));
  CHECK(var.y == doctest::Approx(1.0).epsilon(0.08));
  CHECK(var.z == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("evaluate_linear_solution: constants, t=0, and mixing") {
  const KineticParams p{1.0, 1.0};
  const TorusGeometry geom{1.0};
  RandomStream rng(19);
  const auto one = evaluate_linear_solution([](const Vec3&) { return 1.0; }, 0.7, {0.5, 0.5, 0.5},
                                            {1, 0, 0}, 200, p, geom, rng);
  CHECK(one.value == 1.0);
  CHECK(one.stderr_ == doctest::Approx(0.0));

  auto profile = [](const Vec3& x) { return 1.0 + std::cos(2.0 * kPi * x.x); };
  const auto at0 = evaluate_linear_solution(profile, 0.0, {0.25, 0.5, 0.5}, {1, 1, 0}, 100, p,
                                            geom, rng);
  CHECK(at0.value == doctest::Approx(profile({0.25, 0.5, 0.5})).epsilon(1e-12));
  CHECK(at0.stderr_ <= 1e-12);

  const double T = 30.0 * mean_free_time(p);
  const auto mixed =
      evaluate_linear_solution(profile, T, {0.25, 0.5, 0.5}, {1, 0, 0}, 4000, p, geom, rng);
  CHECK(std::fabs(mixed.value - 1.0) <= 4.0 * mixed.stderr_ + 0.01);
}

TEST_CASE("evaluate_linear_solution is linear in the profile and bounded by it") {
  const KineticParams p{1.0, 1.0};
  const TorusGeometry geom{1.0};
  auto f = [](const Vec3& x) { return 1.0 + 0.5 * std::sin(2.0 * kPi * x.y); };
  auto g = [&](const Vec3& x) { return 3.0 * f(x) + 2.0; };
  RandomStream r1(23), r2(23);  // identical paths for both estimates
  const auto ef = evaluate_linear_solution(f, 0.4, {0.1, 0.2, 0.3}, {0, 1, 0}, 500, p, geom, r1);
  const auto eg = evaluate_linear_solution(g, 0.4, {0.1, 0.2, 0.3}, {0, 1, 0}, 500, p, geom, r2);
  CHECK(eg.value == doctest::Approx(3.0 * ef.value + 2.0).epsilon(1e-12));
  CHECK(ef.value >= 0.5);
  CHECK(ef.value <= 1.5);
}

TEST_CASE("dsmc: Maxwellian input stays stationary (moments to order 4)") {
  ens::DensitySpec spec = ens::equilibrium_spec(1.0);
  RandomStream rng(29);
  const KineticParams p{1.0, 1.0};
  DistributionState st = make_dsmc_state(spec, 30000, 1.0, p.gamma, 0, rng);
  const double dt = 0.1 * mean_free_time(p);
  for (int s = 0; s < 60; ++s) st = dsmc_step(st, dt, rng);
  double m2 = 0.0, m4 = 0.0;
  Vec3 mom;
  for (std::size_t i = 0; i < st.size(); ++i) {
    m2 += norm2(st.vel[i]);
    m4 += norm2(st.vel[i]) * norm2(st.vel[i]);
    mom += st.vel[i];
  }
  const double n = static_cast<double>(st.size());
  m2 /= n;
  m4 /= n;
  CHECK(m2 == doctest::Approx(3.0).epsilon(0.03));
  CHECK(m4 == doctest::Approx(15.0).epsilon(0.06));
  CHECK(norm(mom) / n < 0.02);
}

TEST_CASE("dsmc conserves momentum and energy exactly each step") {
  ens::DensitySpec spec;
  spec.beta = 1.0;
  spec.vlaw = ens::VelocityLaw::two_beam({1, 0, 0}, 0.0);
  RandomStream rng(31);
  DistributionState st = make_dsmc_state(spec, 20000, 1.0, 1.0, 0, rng);
  const Vec3 p0 = [&] {
    Vec3 s;
    for (const auto& v : st.vel) s += v;
    return s;
  }();
  double e0 = 0.0;
  for (const auto& v : st.vel) e0 += norm2(v);
  const double dt = 0.1 * estimate_mean_free_time(st);
  for (int s = 0; s < 20; ++s) st = dsmc_step(st, dt, rng);
  Vec3 p1;
  double e1 = 0.0;
  for (const auto& v : st.vel) {
    p1 += v;
    e1 += norm2(v);
  }
  CHECK(norm(p1 - p0) <= 1e-9);
  CHECK(std::fabs(e1 - e0) / e0 <= 1e-12);
}

TEST_CASE("dsmc: two beams isotropize to variance |u|^2/3 per component") {
  ens::DensitySpec spec;
  spec.beta = 1.0;
  spec.vlaw = ens::VelocityLaw::two_beam({1, 0, 0}, 0.0);
  RandomStream rng(37);
  DistributionState st = make_dsmc_state(spec, 30000, 1.0, 1.0, 0, rng);
  const KineticParams eq{spec.vlaw.matched_beta(1.0), 1.0};
  const double tau = mean_free_time(eq);
  for (int s = 0; s < 80; ++s) st = dsmc_step(st, 0.1 * tau, rng);
  Vec3 var;
  for (const auto& v : st.vel) var += {v.x * v.x, v.y * v.y, v.z * v.z};
  var *= 1.0 / static_cast<double>(st.size());
  CHECK(var.x == doctest::Approx(1.0 / 3.0).epsilon(0.06));
  CHECK(var.y == doctest::Approx(1.0 / 3.0).epsilon(0.06));
  CHECK(var.z == doctest::Approx(1.0 / 3.0).epsilon(0.06));
}

TEST_CASE("h functional: uniform density gives zero") {
  // velocity box of volume 1 so the joint density is 1 on its support
  ens::GridSpec grid{2, 2, 0.5};
  ens::MarginalAccumulator acc(1, grid, 1.0);
  for (int ix = 0; ix < 2; ++ix)
    for (int iy = 0; iy < 2; ++iy)
      for (int iz = 0; iz < 2; ++iz)
        for (int vx = 0; vx < 2; ++vx)
          for (int vy = 0; vy < 2; ++vy)
            for (int vz = 0; vz < 2; ++vz)
              acc.add({0.25 + 0.5 * ix, 0.25 + 0.5 * iy, 0.25 + 0.5 * iz},
                      {-0.25 + 0.5 * vx, -0.25 + 0.5 * vy, -0.25 + 0.5 * vz});
  const double h = h_plugin(acc.finish());
  CHECK(h == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("h functional: Maxwellian closed form at beta = 2 pi") {
  CHECK(h_maxwellian(2.0 * kPi) == doctest::Approx(-1.5).epsilon(1e-15));

  // quadrature route: sum over an exact erf-mass histogram approaches the
  // closed form as the grid refines
  const ens::GridSpec grid{1, 48, 4.0 / std::sqrt(2.0 * kPi)};
  const ens::MarginalEstimate ref = ens::maxwellian_reference(grid, 1.0, 2.0 * kPi);
  CHECK(h_plugin(ref) == doctest::Approx(-1.5).epsilon(0.01));

  // direct radial quadrature of int M ln M
  const GaussRule gl = gauss_legendre(200, 0.0, 8.0 / std::sqrt(2.0 * kPi));
  double h = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double r = gl.nodes[i];
    const double m = maxwellian_density({r, 0, 0}, 2.0 * kPi);
    h += gl.weights[i] * 4.0 * kPi * r * r * m * std::log(m);
  }
  CHECK(h == doctest::Approx(-1.5).epsilon(1e-10));
}

TEST_CASE("h_estimate applies the occupancy correction with jackknife errors") {
  RandomStream rng(43);
  const ens::GridSpec grid{1, 20, 4.0};
  ens::MarginalAccumulator acc(1, grid, 1.0);
  const int n = 50000;
  for (int i = 0; i < n; ++i) acc.add({0.5, 0.5, 0.5}, sample_maxwellian(1.0, rng));
  const auto est = h_estimate(acc.finish());
  CHECK(est.value == doctest::Approx(est.plugin - est.occupied / (2.0 * n)).epsilon(1e-12));
  CHECK(est.stderr_ > 0.0);
  CHECK(est.stderr_ < 0.05);
  // the corrected estimate sits near the true value (discretization bias aside)
  CHECK(std::fabs(est.value - h_maxwellian(1.0)) < 0.05);
}

TEST_CASE("kinetic series and jump path CSV dumps") {
  std::vector<KineticSeriesRow> rows(2);
  rows[0].t = 0.0;
  rows[0].h = -1.5;
  rows[1].t = 0.5;
  rows[1].momentum = {0.1, 0.2, 0.3};
  rows[1].energy = 1.5;
  rows[1].overflow_mass = 1e-6;
  std::stringstream ss;
  write_kinetic_series_csv(ss, rows);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "t,h,h_stderr,px,py,pz,energy,overflow_mass");
  int n = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++n;
  CHECK(n == 2);

  const KineticParams p{1.0, 1.0};
  RandomStream rng(71);
  std::vector<JumpPath> paths;
  paths.push_back(simulate_jump_path({0, 0, 0}, {1, 0, 0}, 1.0, p, rng));
  paths.push_back(simulate_jump_path({0, 0, 0}, {0, 1, 0}, 1.0, p, rng));
  std::stringstream ps;
  write_jump_paths_csv(ps, paths);
  std::getline(ps, line);
  CHECK(line == "path,time,x,y,z,vx,vy,vz");
  n = 0;
  while (std::getline(ps, line))
    if (!line.empty()) ++n;
  CHECK(n == static_cast<int>(paths[0].jumps.size() + paths[1].jumps.size() + 4));
}

TEST_CASE("detailed balance: jump-event fluxes between velocity bins balance") {
  // at stationarity the event flux A -> B equals B -> A; collect ~1e5 jumps
  // from equilibrium paths and chi^2-test the antisymmetric part
  const KineticParams p{1.0, 1.0};
  RandomStream rng(83);
  const int nb = 6;
  const double vmax = 3.0;
  std::vector<double> counts(static_cast<std::size_t>(nb) * nb, 0.0);
  auto bin_of = [&](double vx) {
    int b = static_cast<int>((vx + vmax) / (2.0 * vmax) * nb);
    return b < 0 ? 0 : (b >= nb ? nb - 1 : b);
  };
  std::size_t events = 0;
  const double horizon = 40.0 * mean_free_time(p);
  while (events < 100'000) {
    const Vec3 v0 = sample_maxwellian(p.beta, rng);
    const JumpPath path = simulate_jump_path({0, 0, 0}, v0, horizon, p, rng);
    Vec3 v = v0;
    for (const auto& j : path.jumps) {
      counts[static_cast<std::size_t>(bin_of(v.x)) * nb + bin_of(j.vel.x)] += 1.0;
      v = j.vel;
      ++events;
    }
  }
  double chi2 = 0.0;
  int dof = 0;
  for (int a = 0; a < nb; ++a)
    for (int b = a + 1; b < nb; ++b) {
      const double ab = counts[static_cast<std::size_t>(a) * nb + b];
      const double ba = counts[static_cast<std::size_t>(b) * nb + a];
      if (ab + ba < 10.0) continue;
      chi2 += (ab - ba) * (ab - ba) / (ab + ba);
      ++dof;
    }
  CHECK(dof >= 10);
  // p ~ 0.001 cutoff for chi^2 with <= 15 dof
  CHECK(chi2 < 37.7);
}
