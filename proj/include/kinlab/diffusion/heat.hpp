#pragma once

#include <vector>

namespace kinlab::diff {

/// Grid density on the unit torus plus the diffusion coefficient it was
/// propagated with. Row-major n^3 layout: ((ix*n)+iy)*n+iz.
struct DiffusionSolution {
  std::vector<double> density;
  int n = 0;
  double d_coeff = 0.0;
  double time = 0.0;

  double at(int ix, int iy, int iz) const {
    return density[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
  }
};

/// Exact spectral propagation of d_t rho = D lap rho on the unit torus:
/// Fourier mode k is damped by exp(-4 pi^2 D |k|^2 t). n must be a power of
/// two. Mass (the zero mode) is untouched.
DiffusionSolution solve_heat(const std::vector<double>& rho_in, int n, double d_coeff, double t);

/// Sample a smooth profile at the n^3 grid nodes i/n (the spectral
/// collocation points, so node values propagate exactly).
template <typename F>
std::vector<double> sample_profile(F&& f, int n) {
  std::vector<double> rho(static_cast<std::size_t>(n) * n * n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz)
        rho[(static_cast<std::size_t>(ix) * n + iy) * n + iz] =
            f(static_cast<double>(ix) / n, static_cast<double>(iy) / n,
              static_cast<double>(iz) / n);
  return rho;
}

}  // namespace kinlab::diff
