#include "kinlab/diffusion/heat.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "kinlab/maxwellian.hpp"

namespace kinlab::diff {
namespace {

using cd = std::complex<double>;

// iterative radix-2 FFT; sign = -1 forward, +1 inverse (unscaled)
void fft(cd* a, int n, int sign) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / len;
    const cd wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      cd w(1.0);
      for (int k = 0; k < len / 2; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void fft3(std::vector<cd>& a, int n, int sign) {
  std::vector<cd> line(static_cast<std::size_t>(n));
  // x lines
  for (int iy = 0; iy < n; ++iy)
    for (int iz = 0; iz < n; ++iz) {
      for (int ix = 0; ix < n; ++ix) line[static_cast<std::size_t>(ix)] = a[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
      fft(line.data(), n, sign);
      for (int ix = 0; ix < n; ++ix) a[(static_cast<std::size_t>(ix) * n + iy) * n + iz] = line[static_cast<std::size_t>(ix)];
    }
  // y lines
  for (int ix = 0; ix < n; ++ix)
    for (int iz = 0; iz < n; ++iz) {
      for (int iy = 0; iy < n; ++iy) line[static_cast<std::size_t>(iy)] = a[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
      fft(line.data(), n, sign);
      for (int iy = 0; iy < n; ++iy) a[(static_cast<std::size_t>(ix) * n + iy) * n + iz] = line[static_cast<std::size_t>(iy)];
    }
  // z lines (contiguous)
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) fft(&a[(static_cast<std::size_t>(ix) * n + iy) * n], n, sign);
}

}  // namespace

DiffusionSolution solve_heat(const std::vector<double>& rho_in, int n, double d_coeff, double t) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::invalid_argument("solve_heat: grid must be a power of two per axis");
  if (rho_in.size() != static_cast<std::size_t>(n) * n * n)
    throw std::invalid_argument("solve_heat: density size != n^3");
  if (!(d_coeff >= 0.0) || !(t >= 0.0))
    throw std::invalid_argument("solve_heat: need D >= 0 and t >= 0");

  std::vector<cd> a(rho_in.begin(), rho_in.end());
  fft3(a, n, -1);
  auto freq = [n](int i) { return i <= n / 2 ? i : i - n; };
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const double k2 = static_cast<double>(freq(ix)) * freq(ix) +
                          static_cast<double>(freq(iy)) * freq(iy) +
                          static_cast<double>(freq(iz)) * freq(iz);
        a[(static_cast<std::size_t>(ix) * n + iy) * n + iz] *=
            std::exp(-4.0 * kPi * kPi * d_coeff * k2 * t);
      }
  fft3(a, n, +1);

  DiffusionSolution sol;
  sol.n = n;
  sol.d_coeff = d_coeff;
  sol.time = t;
  sol.density.resize(rho_in.size());
  const double scale = 1.0 / (static_cast<double>(n) * n * n);
  for (std::size_t i = 0; i < sol.density.size(); ++i) sol.density[i] = a[i].real() * scale;
  return sol;
}

}  // namespace kinlab::diff
