#include "kinlab/md/phase_point.hpp"

#include <string>

namespace kinlab::md {

void validate_phase_point(const PhasePoint& state, const TorusGeometry& geom, double tol) {
  const std::size_t n = state.size();
  if (state.vel.size() != n)
    throw std::invalid_argument("PhasePoint: positions/velocities length mismatch");
  for (const auto& p : state.pos) {
    if (!(p.x >= 0.0 && p.x < geom.side && p.y >= 0.0 && p.y < geom.side && p.z >= 0.0 &&
          p.z < geom.side))
      throw std::invalid_argument("PhasePoint: position not reduced to [0,lambda)^3");
  }
  const double lim = 2.0 * state.radius - tol;
  if (lim <= 0.0) return;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (geom.distance(state.pos[i], state.pos[j]) < lim)
        throw OverlapInput("PhasePoint: pair " + std::to_string(i) + "," + std::to_string(j) +
                           " closer than 2r");
}

}  // namespace kinlab::md
