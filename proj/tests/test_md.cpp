#include <doctest.h>

#include <cmath>
#include <optional>
#include <sstream>

#include "kinlab/ensemble/samplers.hpp"
#include "kinlab/md/collision.hpp"
#include "kinlab/md/io.hpp"
#include "kinlab/md/simulator.hpp"
#include "kinlab/md/stats.hpp"
#include "kinlab/rng.hpp"

using namespace kinlab;
using namespace kinlab::md;

namespace {

// dense time-stepping oracle: advance both particles with step dt and report
// the first time the torus distance drops below 2r (independent of the
// quadratic contact solver)
std::optional<double> contact_by_stepping(Vec3 xi, const Vec3& vi, Vec3 xj, const Vec3& vj,
                                          double r, const TorusGeometry& geom, double horizon,
                                          double dt) {
  for (double t = 0.0; t <= horizon; t += dt) {
    if (geom.distance(xi, xj) < 2.0 * r) return t;
    xi += dt * vi;
    xj += dt * vj;
  }
  return std::nullopt;
}

double min_pair_distance(const PhasePoint& s, const TorusGeometry& geom) {
  double best = 1e300;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      best = std::fmin(best, geom.distance(s.pos[i], s.pos[j]));
  return best;
}

}  // namespace

TEST_CASE("apply_collision: head-on exchange and grazing") {
  const auto [a, b] = apply_collision({1, 0, 0}, {-1, 0, 0}, {1, 0, 0});
  CHECK(a == Vec3{-1, 0, 0});
  CHECK(b == Vec3{1, 0, 0});

  // grazing: relative velocity orthogonal to the normal
  const auto [c, d] = apply_collision({0, 1, 0}, {0, -1, 0}, {1, 0, 0});
  CHECK(c == Vec3{0, 1, 0});
  CHECK(d == Vec3{0, -1, 0});

  CHECK_THROWS_AS(apply_collision({1, 0, 0}, {0, 0, 0}, {0.9, 0, 0}), NonUnitNormal);
}

TEST_CASE("apply_collision: worked example with conservation and involution") {
  const Vec3 vi{1, 2, 0}, vj{0, 0, 1}, n{0, 1, 0};
  const auto [a, b] = apply_collision(vi, vj, n);
  CHECK(a == Vec3{1, 0, 0});
  CHECK(b == Vec3{0, 2, 1});
  CHECK(a + b == vi + vj);  // momentum (1,2,1)
  CHECK(norm2(a) + norm2(b) == doctest::Approx(6.0).epsilon(1e-15));
  const auto [a2, b2] = apply_collision(a, b, n);
  CHECK(a2 == vi);
  CHECK(b2 == vj);
}

TEST_CASE("apply_collision: conservation and isometry over random draws") {
  RandomStream rng(3);
  for (int it = 0; it < 20000; ++it) {
    const Vec3 vi = 3.0 * rng.normal3(), vj = 3.0 * rng.normal3();
    const Vec3 n = rng.unit_sphere();
    const auto [a, b] = apply_collision(vi, vj, n);
    CHECK(norm(a + b - vi - vj) <= 1e-12);
    CHECK(std::fabs(norm2(a) + norm2(b) - norm2(vi) - norm2(vj)) <= 1e-12);
    const auto [a2, b2] = apply_collision(a, b, n);
    CHECK(norm(a2 - vi) <= 1e-12);
    CHECK(norm(b2 - vj) <= 1e-12);
  }
}

TEST_CASE("next_pair_collision: gap closing and receding cases") {
  const TorusGeometry geom{4.0};
  const auto t = next_pair_collision({0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {0, 0, 0}, 0.1, geom);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(0.8).epsilon(1e-12));

  // receding with a transverse offset too large for any wrapped catch-up
  CHECK_FALSE(
      next_pair_collision({1, 0.9, 0}, {1, 0, 0}, {0, 0, 0}, {0, 0, 0}, 0.1, geom).has_value());
  CHECK_THROWS_AS(next_pair_collision({0, 0, 0}, {1, 0, 0}, {0.05, 0, 0}, {0, 0, 0}, 0.1, geom),
                  OverlapInput);
}

TEST_CASE("next_pair_collision agrees with the dense stepping oracle") {
  const TorusGeometry geom{2.0};
  const double r = 0.05;
  RandomStream rng(17);
  int checked = 0, agreed_none = 0;
  for (int it = 0; it < 200; ++it) {
    const Vec3 xi{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)};
    // bias toward near-collision courses so the oracle horizon stays short
    const Vec3 dir = rng.unit_sphere();
    const Vec3 xj = geom.wrap(xi + (2 * r + rng.uniform(0.0, 0.4)) * dir);
    if (geom.distance(xi, xj) < 2 * r + 1e-9) continue;
    // roughly half the pairs get an approach-biased velocity
    const bool aimed = it % 2 == 0;
    const Vec3 vi = aimed ? (1.0 + rng.uniform()) * dir + 0.3 * rng.normal3() : rng.normal3();
    const Vec3 vj = 0.4 * rng.normal3();
    const auto pred = next_pair_collision(xi, vi, xj, vj, r, geom);
    const auto orac = contact_by_stepping(xi, vi, xj, vj, r, geom, 0.5, 1e-5);
    if (orac.has_value()) {
      REQUIRE(pred.has_value());
      CHECK(std::fabs(*pred - *orac) <= 1e-4);
      ++checked;
    } else {
      if (!pred.has_value() || *pred > 0.5 - 1e-4) ++agreed_none;
      CHECK((!pred.has_value() || *pred > 0.5 - 1e-4));
    }
  }
  CHECK(checked > 20);  // the geometry actually produced collisions
  CHECK(agreed_none > 20);
}

TEST_CASE("evolve: single particle free flight") {
  const TorusGeometry geom{1.0};
  PhasePoint s;
  s.pos = {{0.25, 0.5, 0.75}};
  s.vel = {{1.0, -0.5, 2.0}};
  s.radius = 0.0;
  const PhasePoint out = evolve(s, 0.7, geom);
  CHECK(out.time == doctest::Approx(0.7));
  CHECK(out.pos[0].x == doctest::Approx(geom.wrap1(0.25 + 0.7)).epsilon(1e-12));
  CHECK(out.pos[0].y == doctest::Approx(geom.wrap1(0.5 - 0.35)).epsilon(1e-12));
  CHECK(out.pos[0].z == doctest::Approx(geom.wrap1(0.75 + 1.4)).epsilon(1e-12));
  CHECK(out.vel[0] == s.vel[0]);
}

TEST_CASE("evolve: two-particle head-on collision then straight flight") {
  const TorusGeometry geom{4.0};
  PhasePoint s;
  s.pos = {{1.0, 2.0, 2.0}, {3.0, 2.0, 2.0}};
  s.vel = {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
  s.radius = 0.25;
  EventLog log;
  const PhasePoint out = evolve(s, 1.5, geom, &log);
  REQUIRE(log.size() == 1);
  // gap 2 - 0.5 closes at relative speed 2
  CHECK(log[0].time == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(out.vel[0].x == doctest::Approx(-1.0));
  CHECK(out.vel[1].x == doctest::Approx(1.0));
  // straight flight after the exchange
  CHECK(out.pos[0].x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out.pos[1].x == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("evolve: conservation and non-overlap at N=10") {
  const TorusGeometry geom{1.0};
  RandomStream rng(5);
  const ScalingParams scaling = make_scaling(10, 0.3, 1.0, ScalingMode::NonlinearBG);
  const PhasePoint init = ens::sample_equilibrium(scaling, 1.0, rng);
  EventLog log;
  const PhasePoint out = evolve(init, 1.0, geom, &log);
  CHECK(log.size() > 0);
  CHECK(std::fabs(total_kinetic_energy(out) - total_kinetic_energy(init)) <= 1e-9);
  CHECK(norm(total_momentum(out) - total_momentum(init)) <= 1e-9);
  CHECK(min_pair_distance(out, geom) >= 2.0 * scaling.radius - 1e-9);
  for (const auto& e : log) {
    CHECK(norm(e.post_i + e.post_j - e.pre_i - e.pre_j) <= 1e-12);
    CHECK(std::fabs(norm2(e.post_i) + norm2(e.post_j) - norm2(e.pre_i) - norm2(e.pre_j)) <=
          1e-12);
    CHECK(std::fabs(norm(e.normal) - 1.0) <= 1e-12);
  }
}

TEST_CASE("evolve is deterministic") {
  const TorusGeometry geom{1.0};
  RandomStream rng(8);
  const ScalingParams scaling = make_scaling(24, 0.4, 1.0, ScalingMode::NonlinearBG);
  const PhasePoint init = ens::sample_equilibrium(scaling, 1.0, rng);
  EventLog la, lb;
  const PhasePoint a = evolve(init, 0.8, geom, &la);
  const PhasePoint b = evolve(init, 0.8, geom, &lb);
  REQUIRE(la.size() == lb.size());
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i)
    identical = identical && a.pos[i] == b.pos[i] && a.vel[i] == b.vel[i];
  CHECK(identical);
}

TEST_CASE("reverse_velocities basics") {
  PhasePoint s;
  s.pos = {{0.1, 0.2, 0.3}};
  s.vel = {{1, -2, 3}};
  s.radius = 0.0;
  s.time = 4.5;
  const PhasePoint r2 = reverse_velocities(reverse_velocities(s));
  CHECK(r2.vel[0] == s.vel[0]);
  CHECK(r2.pos[0] == s.pos[0]);
  CHECK(r2.time == s.time);
  PhasePoint z = s;
  z.vel[0] = {0, 0, 0};
  CHECK(reverse_velocities(z).vel[0] == Vec3{0, 0, 0});
}

TEST_CASE("mechanical reversibility round trip at N=5") {
  const TorusGeometry geom{1.0};
  RandomStream rng(21);
  const ScalingParams scaling = make_scaling(5, 0.2, 1.0, ScalingMode::NonlinearBG);
  const PhasePoint init = ens::sample_equilibrium(scaling, 1.0, rng);
  PhasePoint s = evolve(init, 0.5, geom);
  s = reverse_velocities(s);
  s = evolve(s, 0.5, geom);
  s = reverse_velocities(s);
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    err = std::fmax(err, norm(geom.displacement(s.pos[i], init.pos[i])));
    err = std::fmax(err, norm(s.vel[i] - init.vel[i]));
  }
  CHECK(err <= 1e-6);
}

TEST_CASE("recollision_stats counts repeated pairs") {
  CHECK(recollision_stats({}).recollision_count == 0);
  CHECK(recollision_stats({}).total == 0);
  EventLog log;
  CollisionEvent e;
  e.i = 1; e.j = 2; e.time = 0.1; log.push_back(e);
  e.i = 1; e.j = 3; e.time = 0.2; log.push_back(e);
  e.i = 1; e.j = 2; e.time = 0.3; log.push_back(e);
  const auto rs = recollision_stats(log);
  CHECK(rs.recollision_count == 1);
  CHECK(rs.total == 3);
}

TEST_CASE("tagged_collision_counts slices the log backwards from t") {
  EventLog log;
  CHECK(tagged_collision_counts(log, 0, 4.0, 1.0, 4) == std::vector<std::size_t>{0, 0, 0, 0});
  CollisionEvent e;
  e.i = 0; e.j = 5; e.time = 3.5; log.push_back(e);  // slice 1: (3,4]
  e.i = 2; e.j = 0; e.time = 2.5; log.push_back(e);  // slice 2: (2,3]
  e.i = 0; e.j = 1; e.time = 1.5; log.push_back(e);  // slice 3
  e.i = 7; e.j = 0; e.time = 0.5; log.push_back(e);  // slice 4
  e.i = 3; e.j = 4; e.time = 2.6; log.push_back(e);  // not tagged
  CHECK(tagged_collision_counts(log, 0, 4.0, 1.0, 4) == std::vector<std::size_t>{1, 1, 1, 1});
  CHECK_THROWS(tagged_collision_counts(log, 0, 3.0, 1.0, 4));
}

TEST_CASE("checkpoint round trip preserves the state bitwise") {
  RandomStream rng(33);
  const ScalingParams scaling = make_scaling(12, 0.3, 1.5, ScalingMode::LinearBG);
  const PhasePoint s = ens::sample_equilibrium(scaling, 2.0, rng);
  std::stringstream ss;
  write_checkpoint(ss, s, 1.5, 777);
  double lambda = 0.0;
  std::uint64_t seed = 0;
  const PhasePoint back = read_checkpoint(ss, &lambda, &seed);
  CHECK(lambda == 1.5);
  CHECK(seed == 777);
  CHECK(back.radius == s.radius);
  REQUIRE(back.size() == s.size());
  bool identical = true;
  for (std::size_t i = 0; i < s.size(); ++i)
    identical = identical && back.pos[i] == s.pos[i] && back.vel[i] == s.vel[i];
  CHECK(identical);
}

TEST_CASE("trajectory dump carries one row per event") {
  const TorusGeometry geom{4.0};
  PhasePoint s;
  s.pos = {{1.0, 2.0, 2.0}, {3.0, 2.0, 2.0}};
  s.vel = {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
  s.radius = 0.25;
  EventLog log;
  evolve(s, 1.0, geom, &log);
  std::stringstream ss;
  write_trajectory(ss, log);
  std::string line;
  int rows = -1;  // header
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  CHECK(rows == static_cast<int>(log.size()));
}
