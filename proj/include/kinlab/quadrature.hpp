#pragma once

#include <vector>

namespace kinlab {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule: integrates f against exp(-x^2) on R exactly for
/// polynomials of degree <= 2n-1.
GaussRule gauss_hermite(int n);

/// n-point Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);

/// Gauss-Legendre mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace kinlab
