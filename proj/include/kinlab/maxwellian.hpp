#pragma once

#include <cmath>

#include "kinlab/rng.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Equilibrium velocity density M_beta(v) = (beta/2pi)^{3/2} exp(-beta|v|^2/2).
inline double maxwellian_density(const Vec3& v, double beta) {
  const double pref = std::pow(beta / (2.0 * kPi), 1.5);
  return pref * std::exp(-0.5 * beta * norm2(v));
}

/// Draw v ~ M_beta; each component Gaussian with variance 1/beta.
inline Vec3 sample_maxwellian(double beta, RandomStream& rng) {
  return (1.0 / std::sqrt(beta)) * rng.normal3();
}

/// Mean speed E|v| under M_beta.
inline double maxwellian_mean_speed(double beta) { return std::sqrt(8.0 / (kPi * beta)); }

/// E|v|^{2k} under M_beta:  (2k+1)!! / beta^k.
inline double maxwellian_even_moment(double beta, int k) {
  double m = 1.0;
  for (int j = 1; j <= k; ++j) m *= (2.0 * j + 1.0) / beta;
  return m;
}

/// Mass of one axis interval [a,b] under the 1-d marginal of M_beta.
inline double maxwellian_interval_mass(double a, double b, double beta) {
  const double s = std::sqrt(beta / 2.0);
  return 0.5 * (std::erf(b * s) - std::erf(a * s));
}

}  // namespace kinlab
