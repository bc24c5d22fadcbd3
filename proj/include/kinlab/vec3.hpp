#pragma once

#include <cmath>

namespace kinlab {

/// Plain 3-vector with value semantics. Everything in the library is 3-d.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr const double& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

constexpr bool operator==(const Vec3& a, const Vec3& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z;
}

/// Orthonormal pair completing u/|u| to a right-handed frame. |u| must be > 0.
inline void orthonormal_frame(const Vec3& u, Vec3& e1, Vec3& e2) {
  const double r = norm(u);
  const Vec3 w{u.x / r, u.y / r, u.z / r};
  // pick the axis least aligned with w to avoid degeneracy
  const double ax = std::fabs(w.x), ay = std::fabs(w.y), az = std::fabs(w.z);
  Vec3 a = (ax <= ay && ax <= az) ? Vec3{1, 0, 0} : (ay <= az ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  e1 = a - dot(a, w) * w;
  e1 *= 1.0 / norm(e1);
  e2 = {w.y * e1.z - w.z * e1.y, w.z * e1.x - w.x * e1.z, w.x * e1.y - w.y * e1.x};
}

}  // namespace kinlab
