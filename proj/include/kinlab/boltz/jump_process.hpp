#pragma once

#include <functional>
#include <vector>

#include "kinlab/boltz/frequency.hpp"
#include "kinlab/params.hpp"
#include "kinlab/rng.hpp"
#include "kinlab/torus.hpp"

namespace kinlab::boltz {

/// Sample path of the velocity-jump process: free flight, and at exponential
/// times with state-dependent rate nu(v) the velocity jumps by a background
/// collision. Positions are tracked unwrapped (callers reduce to the torus
/// when they need to).
struct JumpPath {
  struct Jump {
    double time;
    Vec3 pos;      // unwrapped position at the jump
    Vec3 vel;      // velocity after the jump
  };
  double t0 = 0.0;
  Vec3 x0, v0;
  std::vector<Jump> jumps;
  double final_time = 0.0;

  Vec3 position_at(double t) const {
    Vec3 x = x0;
    Vec3 v = v0;
    double tc = t0;
    for (const auto& j : jumps) {
      if (j.time >= t) break;
      x = j.pos;
      v = j.vel;
      tc = j.time;
    }
    return x + (t - tc) * v;
  }

  Vec3 velocity_at(double t) const {
    Vec3 v = v0;
    for (const auto& j : jumps) {
      if (j.time > t) break;
      v = j.vel;
    }
    return v;
  }
};

/// Simulate the jump process from (x0, v0) over [0, horizon] by thinning
/// against the majorant gamma*pi*(|v| + 2/sqrt(beta)).
JumpPath simulate_jump_path(const Vec3& x0, const Vec3& v0, double horizon,
                            const KineticParams& params, RandomStream& rng);

struct MeanEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Backward Monte Carlo estimate of the solution f of
///   (d_t + v.grad_x + L_beta) f = 0,   f(0, x, v) = profile(x)
/// at (t, x, v): average of the initial profile over jump-path endpoints
/// started from (x, -v) (the path generator is v.grad_x - L_beta, and L_beta
/// commutes with velocity reflection, so the velocity is reflected once at
/// the start). Positions are reduced to the torus before evaluating profile.
MeanEstimate evaluate_linear_solution(const std::function<double(const Vec3&)>& profile,
                                      double t, const Vec3& x, const Vec3& v,
                                      std::size_t n_paths, const KineticParams& params,
                                      const TorusGeometry& geom, RandomStream& rng);

}  // namespace kinlab::boltz
