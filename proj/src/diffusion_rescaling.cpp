#include "kinlab/diffusion/rescaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinlab/boltz/jump_process.hpp"
#include "kinlab/diffusion/heat.hpp"
#include "kinlab/torus.hpp"

namespace kinlab::diff {

std::vector<RescalingResult> diffusive_rescaling_error(
    const std::function<double(double)>& rho_in_axis, const std::vector<double>& lambdas,
    const std::vector<double>& times_s, const KineticParams& params, double d_coeff,
    std::size_t n_paths, const std::vector<Vec3>& test_velocities, int n_y, int heat_grid,
    RandomStream& rng) {
  if (lambdas.empty() || times_s.empty() || test_velocities.empty() || n_y < 1)
    throw std::invalid_argument("diffusive_rescaling_error: empty sweep");
  if (heat_grid % n_y != 0)
    throw std::invalid_argument("diffusive_rescaling_error: heat_grid must be divisible by n_y");

  // heat references rho(s, y1) per macroscopic time (profile depends on y1 only)
  const std::vector<double> rho0 = sample_profile(
      [&](double y1, double, double) { return rho_in_axis(y1); }, heat_grid);
  std::vector<std::vector<double>> rho_ref(times_s.size(),
                                           std::vector<double>(static_cast<std::size_t>(n_y)));
  for (std::size_t si = 0; si < times_s.size(); ++si) {
    const DiffusionSolution sol = solve_heat(rho0, heat_grid, d_coeff, times_s[si]);
    for (int j = 0; j < n_y; ++j)
      rho_ref[si][static_cast<std::size_t>(j)] = sol.at(j * (heat_grid / n_y), 0, 0);
  }

  std::vector<double> s_sorted = times_s;
  std::sort(s_sorted.begin(), s_sorted.end());

  std::vector<RescalingResult> results;
  for (const double lambda : lambdas) {
    const TorusGeometry geom{lambda};
    RescalingResult res;
    res.lambda = lambda;
    const double horizon = lambda * lambda * s_sorted.back();

    for (const Vec3& v : test_velocities) {
      // one path batch per velocity, displacements reused across the y grid
      std::vector<std::vector<Vec3>> disp(times_s.size());
      for (auto& d : disp) d.reserve(n_paths);
      for (std::size_t p = 0; p < n_paths; ++p) {
        const boltz::JumpPath path = boltz::simulate_jump_path({0, 0, 0}, -v, horizon, params, rng);
        for (std::size_t si = 0; si < times_s.size(); ++si)
          disp[si].push_back(path.position_at(lambda * lambda * times_s[si]));
      }
      for (std::size_t si = 0; si < times_s.size(); ++si)
        for (int j = 0; j < n_y; ++j) {
          const double y1 = static_cast<double>(j) / n_y;
          double sum = 0.0, sum2 = 0.0;
          for (std::size_t p = 0; p < n_paths; ++p) {
            const double xw = geom.wrap1(lambda * y1 + disp[si][p].x);
            const double val = rho_in_axis(xw / lambda);
            sum += val;
            sum2 += val * val;
          }
          const double np = static_cast<double>(n_paths);
          RescalingPoint pt;
          pt.s = times_s[si];
          pt.y1 = y1;
          pt.v = v;
          pt.f_est = sum / np;
          pt.f_stderr = std::sqrt(std::fmax(0.0, sum2 / np - pt.f_est * pt.f_est) / np);
          pt.rho_ref = rho_ref[si][static_cast<std::size_t>(j)];
          pt.abs_err = std::fabs(pt.f_est - pt.rho_ref);
          res.sup_error = std::fmax(res.sup_error, pt.abs_err);
          res.noise_floor = std::fmax(res.noise_floor, pt.f_stderr);
          res.points.push_back(pt);
        }
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace kinlab::diff
