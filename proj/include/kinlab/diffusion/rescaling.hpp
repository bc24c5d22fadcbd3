#pragma once

#include <functional>
#include <vector>

#include "kinlab/params.hpp"
#include "kinlab/rng.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab::diff {

struct RescalingPoint {
  double s = 0.0;       // macroscopic time
  double y1 = 0.0;      // macroscopic position along the first axis
  Vec3 v;               // velocity argument
  double f_est = 0.0;   // f_lambda(lambda^2 s, lambda y, v) estimate
  double f_stderr = 0.0;
  double rho_ref = 0.0;
  double abs_err = 0.0;
};

struct RescalingResult {
  double lambda = 0.0;
  double sup_error = 0.0;
  double noise_floor = 0.0;  // max MC stderr over the sampled grid
  std::vector<RescalingPoint> points;
};

/// Diffusive-rescaling discrepancy sweep: for each lambda, compare the
/// kinetic solution f_lambda (initial data rho_in(x/lambda), estimated by
/// backward jump paths started at velocity -v and reused across the y grid)
/// with the heat solution rho(s, y) at the sampled (s, y, v) grid.
/// rho_in lives on the unit torus; heat_grid must be a power of two and a
/// multiple of n_y so reference values land on grid nodes.
std::vector<RescalingResult> diffusive_rescaling_error(
    const std::function<double(double)>& rho_in_axis,  // profile of y1 only
    const std::vector<double>& lambdas, const std::vector<double>& times_s,
    const KineticParams& params, double d_coeff, std::size_t n_paths,
    const std::vector<Vec3>& test_velocities, int n_y, int heat_grid, RandomStream& rng);

}  // namespace kinlab::diff
