#include "kinlab/boltz/jump_process.hpp"

#include <cmath>

namespace kinlab::boltz {

JumpPath simulate_jump_path(const Vec3& x0, const Vec3& v0, double horizon,
                            const KineticParams& params, RandomStream& rng) {
  if (horizon < 0.0) throw std::invalid_argument("simulate_jump_path: horizon must be >= 0");
  JumpPath path;
  path.x0 = x0;
  path.v0 = v0;
  path.final_time = horizon;

  double t = 0.0;
  Vec3 x = x0, v = v0;
  double majorant = frequency_majorant(v, params);
  while (true) {
    const double dt = rng.exponential(majorant);
    if (t + dt > horizon) break;
    t += dt;
    x += dt * v;
    double nu = collision_frequency(v, params);
    if (nu > majorant) majorant = 2.0 * nu;  // cannot happen; kept as a guard
    if (rng.uniform() * majorant <= nu) {
      v = sample_post_collision(v, params, rng);
      path.jumps.push_back({t, x, v});
      majorant = frequency_majorant(v, params);
    }
  }
  return path;
}

MeanEstimate evaluate_linear_solution(const std::function<double(const Vec3&)>& profile,
                                      double t, const Vec3& x, const Vec3& v,
                                      std::size_t n_paths, const KineticParams& params,
                                      const TorusGeometry& geom, RandomStream& rng) {
  if (n_paths == 0) throw std::invalid_argument("evaluate_linear_solution: n_paths >= 1");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    const JumpPath path = simulate_jump_path(x, -v, t, params, rng);
    const double val = profile(geom.wrap(path.position_at(t)));
    sum += val;
    sum2 += val * val;
  }
  const double n = static_cast<double>(n_paths);
  MeanEstimate est;
  est.value = sum / n;
  const double var = std::fmax(0.0, sum2 / n - est.value * est.value);
  est.stderr_ = std::sqrt(var / n);
  return est;
}

}  // namespace kinlab::boltz
