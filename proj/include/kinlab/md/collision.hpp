#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "kinlab/errors.hpp"
#include "kinlab/torus.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab::md {

/// Elastic hard-sphere exchange: reflects the normal component of the
/// relative velocity. n must be unit (within 1e-12). Pair momentum and
/// kinetic energy are preserved identically by construction.
inline std::pair<Vec3, Vec3> apply_collision(const Vec3& v_i, const Vec3& v_j, const Vec3& n) {
  if (std::fabs(norm2(n) - 1.0) > 2e-12)
    throw NonUnitNormal("apply_collision: |n| deviates from 1 beyond tolerance");
  const double q = dot(v_i - v_j, n);
  return {v_i - q * n, v_j + q * n};
}

/// First approaching root of |d + s u| = 2r over the torus images
/// d + side*k, k in [-kmax, kmax]^3. Grazing roots (normal relative speed
/// below 1e-12) are non-events. Used by both the contact predictor and the
/// event-driven scheduler.
inline std::optional<double> first_image_contact(const Vec3& d0, const Vec3& u, double r,
                                                 double side, int kmax) {
  const double u2 = norm2(u);
  if (u2 == 0.0) return std::nullopt;
  const double four_r2 = 4.0 * r * r;
  std::optional<double> best;
  for (int kx = -kmax; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky)
      for (int kz = -kmax; kz <= kmax; ++kz) {
        const Vec3 d{d0.x + kx * side, d0.y + ky * side, d0.z + kz * side};
        const double b = dot(d, u);
        if (b >= 0.0) continue;
        const double disc = b * b - u2 * (norm2(d) - four_r2);
        if (disc <= 0.0) continue;
        double s = (-b - std::sqrt(disc)) / u2;
        if (s < 0.0) s = 0.0;  // marginal contact from the numerical boundary
        const Vec3 dc = d + s * u;
        const double ndc = norm(dc);
        if (ndc > 0.0 && std::fabs(dot(dc, u)) / ndc < 1e-12) continue;  // grazing
        if (!best || s < *best) best = s;
      }
  return best;
}

/// First time t > 0 at which the pair reaches torus distance 2r while
/// approaching, under free flight from (x_i, v_i), (x_j, v_j); nullopt when
/// no such contact exists (the root is minimized over nearby torus images).
/// Throws OverlapInput if the initial distance is already below 2r - 1e-9.
inline std::optional<double> next_pair_collision(const Vec3& x_i, const Vec3& v_i, const Vec3& x_j,
                                                 const Vec3& v_j, double r,
                                                 const TorusGeometry& geom) {
  const Vec3 d = geom.displacement(x_i, x_j);
  if (norm2(d) < 4.0 * r * r - 2e-9 * r * 2.0)
    throw OverlapInput("next_pair_collision: initial distance below 2r - 1e-9");
  return first_image_contact(d, v_i - v_j, r, geom.side, 4);
}

}  // namespace kinlab::md
