#include "kinlab/diffusion/fredholm.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "kinlab/errors.hpp"
#include "kinlab/maxwellian.hpp"
#include "kinlab/quadrature.hpp"

namespace kinlab::diff {
namespace {

// L_k^{(alpha)}(x) for k = 0..deg-1
void laguerre_all(double alpha, double x, int deg, double* out) {
  if (deg <= 0) return;
  out[0] = 1.0;
  if (deg == 1) return;
  out[1] = 1.0 + alpha - x;
  for (int k = 1; k + 1 < deg; ++k)
    out[k + 1] = ((2.0 * k + 1.0 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0);
}

// orthonormalization constants
std::vector<double> norms(double beta, int deg, bool odd_sector) {
  std::vector<double> n(static_cast<std::size_t>(deg));
  for (int m = 0; m < deg; ++m) {
    double ln2;
    if (odd_sector) {
      // N^2 = beta sqrt(pi) m! / (4 Gamma(m+5/2))
      ln2 = std::log(beta) + 0.5 * std::log(kPi) + std::lgamma(m + 1.0) - std::log(4.0) -
            std::lgamma(m + 2.5);
    } else {
      // N^2 = sqrt(pi) m! / (2 Gamma(m+3/2))
      ln2 = 0.5 * std::log(kPi) + std::lgamma(m + 1.0) - std::log(2.0) - std::lgamma(m + 1.5);
    }
    n[static_cast<std::size_t>(m)] = std::exp(0.5 * ln2);
  }
  return n;
}

// Gaussian elimination with partial pivoting (sizes here are <= ~20)
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b, int n) {
  std::vector<int> piv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) piv[static_cast<std::size_t>(i)] = i;
  for (int col = 0; col < n; ++col) {
    int best = col;
    double bestv = std::fabs(a[static_cast<std::size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::fabs(a[static_cast<std::size_t>(r) * n + col]);
      if (v > bestv) {
        bestv = v;
        best = r;
      }
    }
    if (bestv == 0.0) throw std::runtime_error("dense_solve: singular matrix");
    if (best != col) {
      for (int c = 0; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(col) * n + c], a[static_cast<std::size_t>(best) * n + c]);
      std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(best)]);
    }
    const double d = a[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r) * n + col] / d;
      if (f == 0.0) continue;
      a[static_cast<std::size_t>(r) * n + col] = 0.0;
      for (int c = col + 1; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * b[static_cast<std::size_t>(c)];
    b[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r) * n + r];
  }
  return b;
}

}  // namespace

LBetaMatrices assemble_l_beta(double beta, int degree, bool odd_sector,
                              bool with_one_sided) {
  if (degree < 1) throw std::invalid_argument("assemble_l_beta: degree >= 1");
  const double alpha = odd_sector ? 1.5 : 0.5;
  const std::vector<double> nrm = norms(beta, degree, odd_sector);

  // the integrand is polynomial of degree <= 2*degree in (u.n) and (v.n), so
  // the contact variables need only ~degree points for exactness; the radial
  // and cosine rules carry the |u| kink and get the larger budgets
  const int n_r = 2 * degree + 20;   // Gauss-Hermite (full line; positive half used)
  const int n_c = 2 * degree + 20;   // inter-velocity cosine
  const int n_t = degree + 10;       // contact polar variable on (0,1)
  const int n_phi = 2 * degree + 10; // contact azimuth (uniform, exact for trig polys)

  const GaussRule gh = gauss_hermite(n_r);
  const GaussRule glc = gauss_legendre(n_c, -1.0, 1.0);
  const GaussRule glt = gauss_legendre(n_t, 0.0, 1.0);

  const double rad_scale = std::sqrt(2.0 / beta);
  const std::size_t d = static_cast<std::size_t>(degree);
  std::vector<double> dir(d * d, 0.0), one(d * d, 0.0), gram(d * d, 0.0);

  std::vector<double> lag_v(d), lag_p(d), buf(d);

  // Gram: single radial integral, (4/sqrt(pi)) sum w s^2 phi_l phi_m [r^2]
  for (std::size_t iv = 0; iv < gh.nodes.size(); ++iv) {
    const double s = gh.nodes[iv];
    if (s <= 0.0) continue;
    const double rv = s * rad_scale;
    laguerre_all(alpha, s * s, degree, lag_v.data());
    for (int l = 0; l < degree; ++l) lag_v[static_cast<std::size_t>(l)] *= nrm[static_cast<std::size_t>(l)];
    const double wsector = odd_sector ? rv * rv : 1.0;
    const double w = (4.0 / std::sqrt(kPi)) * gh.weights[iv] * s * s * wsector;
    for (int l = 0; l < degree; ++l)
      for (int m = 0; m < degree; ++m)
        gram[static_cast<std::size_t>(l) * d + m] += w * lag_v[static_cast<std::size_t>(l)] * lag_v[static_cast<std::size_t>(m)];
  }

  // collision integrals
  const double pref = 8.0 / kPi;
  for (std::size_t iv = 0; iv < gh.nodes.size(); ++iv) {
    const double sv = gh.nodes[iv];
    if (sv <= 0.0) continue;
    const double rv = sv * rad_scale;
    const double wv = gh.weights[iv] * sv * sv;
    laguerre_all(alpha, sv * sv, degree, lag_v.data());
    for (int l = 0; l < degree; ++l) lag_v[static_cast<std::size_t>(l)] *= nrm[static_cast<std::size_t>(l)];
    const Vec3 v{0.0, 0.0, rv};

    for (std::size_t iw = 0; iw < gh.nodes.size(); ++iw) {
      const double sw = gh.nodes[iw];
      if (sw <= 0.0) continue;
      const double rw = sw * rad_scale;
      const double ww = gh.weights[iw] * sw * sw;

      for (std::size_t ic = 0; ic < glc.nodes.size(); ++ic) {
        const double c = glc.nodes[ic];
        const double wc = glc.weights[ic];
        const Vec3 vstar{rw * std::sqrt(std::fmax(0.0, 1.0 - c * c)), 0.0, rw * c};
        const Vec3 u = v - vstar;
        const double unorm = norm(u);
        if (unorm < 1e-14) continue;
        Vec3 e1, e2;
        orthonormal_frame(u, e1, e2);
        const Vec3 uhat = (1.0 / unorm) * u;

        const double w3 = pref * wv * ww * wc * unorm;
        for (std::size_t it = 0; it < glt.nodes.size(); ++it) {
          const double t = glt.nodes[it];
          const double wt = glt.weights[it] * t;
          const double st = std::sqrt(std::fmax(0.0, 1.0 - t * t));
          for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = 2.0 * kPi * (ip + 0.5) / n_phi;
            const Vec3 n = t * uhat + st * (std::cos(phi) * e1 + std::sin(phi) * e2);
            const double q = unorm * t;  // (u.n)
            const Vec3 vp = v - q * n;
            const double vp2 = norm2(vp);
            laguerre_all(alpha, 0.5 * beta * vp2, degree, lag_p.data());
            for (int l = 0; l < degree; ++l)
              lag_p[static_cast<std::size_t>(l)] *= nrm[static_cast<std::size_t>(l)];

            const double wnode = w3 * wt * (2.0 * kPi / n_phi);
            if (odd_sector) {
              const double vv = rv * rv;
              const double vvp = dot(v, vp);
              for (int l = 0; l < degree; ++l) {
                const double al = lag_v[static_cast<std::size_t>(l)];
                const double alp = lag_p[static_cast<std::size_t>(l)];
                for (int m = l; m < degree; ++m) {
                  const double am = lag_v[static_cast<std::size_t>(m)];
                  const double amp = lag_p[static_cast<std::size_t>(m)];
                  // (Psi_l(v)-Psi_l(v')).(Psi_m(v)-Psi_m(v'))
                  const double dd =
                      al * am * vv - (al * amp + alp * am) * vvp + alp * amp * vp2;
                  dir[static_cast<std::size_t>(l) * d + m] += 0.5 * wnode * dd;
                }
                if (!with_one_sided) continue;
                for (int m = 0; m < degree; ++m) {
                  const double am = lag_v[static_cast<std::size_t>(m)];
                  const double amp = lag_p[static_cast<std::size_t>(m)];
                  // Psi_l(v).(Psi_m(v) - Psi_m(v'))
                  one[static_cast<std::size_t>(l) * d + m] +=
                      wnode * (al * am * vv - al * amp * vvp);
                }
              }
            } else {
              for (int l = 0; l < degree; ++l) {
                const double dl = lag_v[static_cast<std::size_t>(l)] - lag_p[static_cast<std::size_t>(l)];
                for (int m = l; m < degree; ++m)
                  dir[static_cast<std::size_t>(l) * d + m] +=
                      0.5 * wnode * dl * (lag_v[static_cast<std::size_t>(m)] - lag_p[static_cast<std::size_t>(m)]);
                if (!with_one_sided) continue;
                for (int m = 0; m < degree; ++m)
                  one[static_cast<std::size_t>(l) * d + m] +=
                      wnode * lag_v[static_cast<std::size_t>(l)] *
                      (lag_v[static_cast<std::size_t>(m)] - lag_p[static_cast<std::size_t>(m)]);
              }
            }
          }
        }
      }
    }
  }
  // symmetric fill of the Dirichlet form
  for (int l = 0; l < degree; ++l)
    for (int m = 0; m < l; ++m)
      dir[static_cast<std::size_t>(l) * d + m] = dir[static_cast<std::size_t>(m) * d + l];

  LBetaMatrices out;
  out.beta = beta;
  out.degree = degree;
  out.odd_sector = odd_sector;
  out.dirichlet = std::move(dir);
  out.one_sided = std::move(one);
  out.gram = std::move(gram);
  return out;
}

std::vector<double> apply_l_beta(std::span<const double> coeffs, const LBetaMatrices& mat,
                                 double gamma) {
  if (static_cast<int>(coeffs.size()) > mat.degree)
    throw std::invalid_argument("apply_l_beta: coefficient vector longer than basis");
  // orthonormal basis: Gram ~ I, so the projection is just the matrix action
  const double gmax = [&] {
    double g = 0.0;
    for (int l = 0; l < mat.degree; ++l)
      for (int m = 0; m < mat.degree; ++m)
        g = std::fmax(g, std::fabs(mat.at(mat.gram, l, m) - (l == m ? 1.0 : 0.0)));
    return g;
  }();
  if (gmax > 1e-4)
    throw QuadratureDegeneracy("apply_l_beta: Gram deviates from identity by " +
                               std::to_string(gmax));
  std::vector<double> out(static_cast<std::size_t>(mat.degree), 0.0);
  for (int l = 0; l < mat.degree; ++l) {
    double s = 0.0;
    for (std::size_t m = 0; m < coeffs.size(); ++m)
      s += mat.at(mat.one_sided, l, static_cast<int>(m)) * coeffs[m];
    out[static_cast<std::size_t>(l)] = gamma * s;
  }
  return out;
}

double FredholmSolution::eval_radial(double speed) const {
  const int deg = degree;
  std::vector<double> lag(static_cast<std::size_t>(deg));
  laguerre_all(1.5, 0.5 * params.beta * speed * speed, deg, lag.data());
  const std::vector<double> nrm = norms(params.beta, deg, true);
  double a = 0.0;
  for (int m = 0; m < deg; ++m)
    a += coeffs[static_cast<std::size_t>(m)] * nrm[static_cast<std::size_t>(m)] * lag[static_cast<std::size_t>(m)];
  return a;
}

FredholmSolution solve_fredholm(const KineticParams& params, int degree,
                                const LBetaMatrices* prebuilt) {
  params.validate();
  if (degree < 4) throw std::invalid_argument("solve_fredholm: degree >= 4 required");
  const int test_degree = degree + 4;
  if (prebuilt && (prebuilt->degree != test_degree || prebuilt->beta != params.beta ||
                   !prebuilt->odd_sector))
    throw std::invalid_argument("solve_fredholm: prebuilt assembly does not match");
  const LBetaMatrices mat =
      prebuilt ? *prebuilt : assemble_l_beta(params.beta, test_degree, true, false);

  // Gram sanity
  for (int l = 0; l < test_degree; ++l)
    for (int m = 0; m < test_degree; ++m) {
      const double dev = std::fabs(mat.at(mat.gram, l, m) - (l == m ? 1.0 : 0.0));
      if (dev > 1e-4)
        throw QuadratureDegeneracy("solve_fredholm: Gram deviation " + std::to_string(dev));
    }

  // rhs in the orthonormal basis: b_l = delta_{l0} sqrt(3/beta)
  const double b0 = std::sqrt(3.0 / params.beta);

  auto solve_at = [&](int deg) {
    std::vector<double> a(static_cast<std::size_t>(deg) * deg);
    for (int l = 0; l < deg; ++l)
      for (int m = 0; m < deg; ++m)
        a[static_cast<std::size_t>(l) * deg + m] = params.gamma * mat.at(mat.dirichlet, l, m);
    std::vector<double> rhs(static_cast<std::size_t>(deg), 0.0);
    rhs[0] = b0;
    return dense_solve(std::move(a), std::move(rhs), deg);
  };

  auto residual_at = [&](const std::vector<double>& c) {
    double r2 = 0.0;
    for (int l = 0; l < test_degree; ++l) {
      double s = 0.0;
      for (std::size_t m = 0; m < c.size(); ++m)
        s += params.gamma * mat.at(mat.dirichlet, l, static_cast<int>(m)) * c[m];
      const double r = s - (l == 0 ? b0 : 0.0);
      r2 += r * r;
    }
    return std::sqrt(r2);
  };

  const std::vector<double> c = solve_at(degree);
  const double res = residual_at(c);
  if (degree > 4) {
    const double res_low = residual_at(solve_at(degree - 2));
    if (res > res_low * (1.0 + 1e-9) + 1e-14)
      throw NonConvergence("solve_fredholm: residual does not decrease with degree (" +
                           std::to_string(res) + " vs " + std::to_string(res_low) + ")");
  }

  FredholmSolution sol;
  sol.degree = degree;
  sol.params = params;
  sol.coeffs = c;
  sol.residual = res;
  return sol;
}

double diffusion_coefficient(const FredholmSolution& sol) {
  // D = (1/3) <v.A>_{M_beta} and v = b0 * Psi_0 in the orthonormal basis
  return sol.coeffs[0] * std::sqrt(3.0 / sol.params.beta) / 3.0;
}

double v_dot_l_beta_v(double beta) { return 8.0 * std::sqrt(kPi) / std::pow(beta, 1.5); }

void write_fredholm_csv(std::ostream& os, const FredholmSolution& sol) {
  auto g17 = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "# beta=" << g17(sol.params.beta) << " gamma=" << g17(sol.params.gamma)
     << " degree=" << sol.degree << " residual=" << g17(sol.residual)
     << " d=" << g17(diffusion_coefficient(sol)) << "\n";
  os << "index,coefficient\n";
  for (std::size_t m = 0; m < sol.coeffs.size(); ++m)
    os << m << ',' << g17(sol.coeffs[m]) << "\n";
}

}  // namespace kinlab::diff
