#include "kinlab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace kinlab {
namespace {

// Eigenvalues of a symmetric tridiagonal matrix (diag d, off-diagonal e) by
// the implicit-shift QL algorithm. Nodes of a Gauss rule are the eigenvalues
// of the Jacobi matrix of the orthonormal recurrence (Golub-Welsch).
void tridiag_eigenvalues(std::vector<double>& d, std::vector<double>& e) {
  const int n = static_cast<int>(d.size());
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) throw std::runtime_error("tridiag_eigenvalues: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  // insertion sort: n is small
  for (int i = 1; i < n; ++i) {
    const double v = d[i];
    int j = i - 1;
    while (j >= 0 && d[j] > v) {
      d[j + 1] = d[j];
      --j;
    }
    d[j + 1] = v;
  }
}

}  // namespace

GaussRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1 required");
  std::vector<double> d(n, 0.0), e(n - 1);
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k / 2.0);
  tridiag_eigenvalues(d, e);

  GaussRule rule;
  rule.nodes = d;
  rule.weights.resize(n);
  const double mu0 = std::sqrt(3.14159265358979323846);  // integral of the weight
  for (int i = 0; i < n; ++i) {
    // weight_i = mu0 / sum_k p_k(x_i)^2 over the orthonormal Hermite family
    const double x = rule.nodes[i];
    double pm1 = 0.0, p = 1.0, sum = 1.0;
    for (int k = 0; k < n - 1; ++k) {
      const double pn = (x * p - std::sqrt(k / 2.0) * pm1) / std::sqrt((k + 1) / 2.0);
      pm1 = p;
      p = pn;
      sum += p * p;
    }
    rule.weights[i] = mu0 / sum;
  }
  return rule;
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  std::vector<double> d(n, 0.0), e(n - 1);
  for (int k = 1; k < n; ++k) e[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  tridiag_eigenvalues(d, e);

  GaussRule rule;
  rule.nodes = d;
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    double pm1 = 0.0, p = 1.0, sum = 1.0;  // orthonormal Legendre: p_0 = 1/sqrt(2) scaled out
    for (int k = 0; k < n - 1; ++k) {
      const double bk = k == 0 ? 0.0 : k / std::sqrt(4.0 * k * k - 1.0);
      const double bk1 = (k + 1) / std::sqrt(4.0 * (k + 1.0) * (k + 1.0) - 1.0);
      const double pn = (x * p - bk * pm1) / bk1;
      pm1 = p;
      p = pn;
      sum += p * p;
    }
    rule.weights[i] = 2.0 / sum;  // mu0 = 2 on [-1,1]
  }
  return rule;
}

GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

}  // namespace kinlab
