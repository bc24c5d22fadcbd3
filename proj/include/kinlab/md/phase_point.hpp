#pragma once

#include <cstdint>
#include <vector>

#include "kinlab/errors.hpp"
#include "kinlab/torus.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab::md {

/// Full N-particle microstate: positions reduced to [0,lambda)^3, velocities,
/// common sphere radius, and the simulation clock.
struct PhasePoint {
  std::vector<Vec3> pos;
  std::vector<Vec3> vel;
  double radius = 0.0;
  double time = 0.0;

  std::size_t size() const { return pos.size(); }
};

/// One resolved elastic collision.
struct CollisionEvent {
  std::uint32_t i = 0, j = 0;  // i < j
  double time = 0.0;
  Vec3 normal;  // unit vector from j to i at contact
  Vec3 pre_i, pre_j;
  Vec3 post_i, post_j;
};

using EventLog = std::vector<CollisionEvent>;

/// Positions reduced and all pairwise torus distances >= 2r (within tol).
/// Throws OverlapInput naming the worst pair otherwise.
void validate_phase_point(const PhasePoint& state, const TorusGeometry& geom,
                          double tol = 1e-9);

/// Velocity reversal R_N: positions and time unchanged, velocities negated.
inline PhasePoint reverse_velocities(PhasePoint state) {
  for (auto& v : state.vel) v = -v;
  return state;
}

inline double total_kinetic_energy(const PhasePoint& s) {
  double e = 0.0;
  for (const auto& v : s.vel) e += norm2(v);
  return 0.5 * e;
}

inline Vec3 total_momentum(const PhasePoint& s) {
  Vec3 p;
  for (const auto& v : s.vel) p += v;
  return p;
}

}  // namespace kinlab::md
