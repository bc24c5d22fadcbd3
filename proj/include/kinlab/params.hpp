#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "kinlab/errors.hpp"

namespace kinlab {

/// Kinetic model parameters: beta is the inverse temperature m/kT (particle
/// mass is normalized to 1 throughout), gamma the collision-rate constant.
struct KineticParams {
  double beta = 1.0;
  double gamma = 1.0;

  void validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("KineticParams: beta must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("KineticParams: gamma must be > 0");
  }
};

enum class ScalingMode { NonlinearBG, LinearBG };

/// Geometric configuration of one N-sphere system on the torus of side lambda.
/// NonlinearBG ties N(2r)^2 = gamma, LinearBG ties N(2r)^2 = gamma*lambda^3.
struct ScalingParams {
  std::size_t n_particles = 0;
  double lambda = 1.0;
  double radius = 0.0;
  ScalingMode mode = ScalingMode::NonlinearBG;

  /// gamma implied by (N, r, lambda) under this mode.
  double gamma_implied() const {
    const double g = static_cast<double>(n_particles) * (2.0 * radius) * (2.0 * radius);
    return mode == ScalingMode::NonlinearBG ? g : g / (lambda * lambda * lambda);
  }

  /// Collision-rate constant per unit volume entering the per-particle rate;
  /// equals gamma for LinearBG (any lambda) and for NonlinearBG at lambda = 1.
  double gamma_effective() const {
    const double g = static_cast<double>(n_particles) * (2.0 * radius) * (2.0 * radius);
    return g / (lambda * lambda * lambda);
  }

  double packing_fraction() const {
    const double v = 4.0 / 3.0 * 3.14159265358979323846 * radius * radius * radius;
    return static_cast<double>(n_particles) * v / (lambda * lambda * lambda);
  }
};

/// Sphere radius from the scaling law; rejects geometries where minimal-image
/// collision detection is ambiguous (4r >= lambda) or rejection sampling of
/// admissible positions would stall (packing fraction > 0.2).
inline double radius_from_scaling(std::size_t n_particles, double gamma, double lambda,
                                  ScalingMode mode) {
  if (n_particles < 2) throw std::invalid_argument("radius_from_scaling: need N >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("radius_from_scaling: gamma must be > 0");
  if (!(lambda >= 1.0)) throw std::invalid_argument("radius_from_scaling: lambda must be >= 1");
  const double n = static_cast<double>(n_particles);
  const double r = mode == ScalingMode::NonlinearBG
                       ? 0.5 * std::sqrt(gamma / n)
                       : 0.5 * std::sqrt(gamma * lambda * lambda * lambda / n);
  if (!(4.0 * r < lambda))
    throw ScalingViolation("4r >= lambda (N too small for this gamma, lambda)");
  ScalingParams s{n_particles, lambda, r, mode};
  if (s.packing_fraction() > 0.2)
    throw ScalingViolation("packing fraction exceeds 0.2");
  return r;
}

inline ScalingParams make_scaling(std::size_t n_particles, double gamma, double lambda,
                                  ScalingMode mode) {
  return {n_particles, lambda, radius_from_scaling(n_particles, gamma, lambda, mode), mode};
}

}  // namespace kinlab
