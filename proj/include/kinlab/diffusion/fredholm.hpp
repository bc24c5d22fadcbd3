#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "kinlab/params.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab::diff {

/// Galerkin matrices of the background collision operator L_beta at gamma = 1
/// (the operator is linear in gamma, so callers scale). Basis functions are
/// orthonormalized radial polynomials:
///   odd sector   Psi_m(v) = N_m L_m^{(3/2)}(beta|v|^2/2) v   (vector fields)
///   even sector  Phi_m(v) = N_m L_m^{(1/2)}(beta|v|^2/2)     (scalars)
/// so the Gram matrix is the identity up to quadrature error. `dirichlet` is
/// assembled from the symmetric Dirichlet form (manifestly PSD), `one_sided`
/// from <basis_l, L_beta basis_m> directly; the two agreeing is a quadrature
/// cross-check, and the one-sided form carries the self-adjointness test.
struct LBetaMatrices {
  double beta = 1.0;
  int degree = 0;
  bool odd_sector = true;
  std::vector<double> dirichlet;  // row-major degree x degree
  std::vector<double> one_sided;
  std::vector<double> gram;

  double at(const std::vector<double>& m, int i, int j) const {
    return m[static_cast<std::size_t>(i) * degree + j];
  }
};

/// Deterministic product quadrature: Gauss-Hermite in the two radial
/// directions, Gauss-Legendre in the inter-velocity angle and the contact
/// polar variable, uniform azimuth. Orders scale with the basis degree
/// (>= 2x) so matrix entries hit ~1e-6 relative accuracy.
LBetaMatrices assemble_l_beta(double beta, int degree, bool odd_sector,
                              bool with_one_sided = true);

/// Galerkin projection of L_beta phi for phi given by basis coefficients.
std::vector<double> apply_l_beta(std::span<const double> coeffs, const LBetaMatrices& mat,
                                 double gamma);

/// Radial profile a with A(v) = a(|v|) v solving L_beta A = v,
/// int A M_beta dv = 0 (automatic in the odd sector).
struct FredholmSolution {
  int degree = 0;
  KineticParams params;
  std::vector<double> coeffs;  // orthonormal odd-sector coordinates
  double residual = 0.0;       // projected residual norm at degree+4 test space

  double eval_radial(double speed) const;          // a(|v|)
  Vec3 eval(const Vec3& v) const { return eval_radial(norm(v)) * v; }
};

/// Galerkin solve of L_beta A = v on the odd isotropic sector. Throws
/// QuadratureDegeneracy if the Gram matrix drifts from the identity and
/// NonConvergence if the residual fails to decrease with degree. A prebuilt
/// odd-sector assembly (at degree + 4) can be shared across gamma values.
FredholmSolution solve_fredholm(const KineticParams& params, int degree,
                                const LBetaMatrices* prebuilt = nullptr);

/// D = (1/3) int v . A(v) M_beta dv.
double diffusion_coefficient(const FredholmSolution& sol);

/// CSV: params header line, then one row per basis coefficient.
void write_fredholm_csv(std::ostream& os, const FredholmSolution& sol);

/// Analytic <v . L_beta v> at gamma = 1: 8 sqrt(pi) / beta^{3/2}
/// (test anchor for the quadrature).
double v_dot_l_beta_v(double beta);

}  // namespace kinlab::diff
