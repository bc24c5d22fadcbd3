#pragma once

#include <cmath>

#include "kinlab/vec3.hpp"

namespace kinlab {

/// Flat 3-torus of side `side` with the minimal-image metric.
struct TorusGeometry {
  double side = 1.0;

  /// Reduce a coordinate to [0, side).
  double wrap1(double x) const {
    double r = x - side * std::floor(x / side);
    if (r >= side) r -= side;  // guards the x = -eps rounding case
    if (r < 0.0) r += side;
    return r;
  }

  Vec3 wrap(const Vec3& x) const { return {wrap1(x.x), wrap1(x.y), wrap1(x.z)}; }

  /// Minimal-image representative of x - y, each component in (-side/2, side/2].
  /// Ties at exactly side/2 take the positive representative.
  Vec3 displacement(const Vec3& x, const Vec3& y) const {
    Vec3 d = x - y;
    d.x -= side * std::ceil(d.x / side - 0.5);
    d.y -= side * std::ceil(d.y / side - 0.5);
    d.z -= side * std::ceil(d.z / side - 0.5);
    return d;
  }

  double distance(const Vec3& x, const Vec3& y) const { return norm(displacement(x, y)); }
};

/// Free-standing name used throughout: minimal-image vector d with
/// x - y ≡ d (mod side·Z^3).
inline Vec3 torus_displacement(const Vec3& x, const Vec3& y, const TorusGeometry& g) {
  return g.displacement(x, y);
}

}  // namespace kinlab
