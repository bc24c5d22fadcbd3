#pragma once

#include <vector>

#include "kinlab/boltz/jump_process.hpp"
#include "kinlab/params.hpp"
#include "kinlab/rng.hpp"

namespace kinlab::diff {

struct GreenKuboResult {
  double d = 0.0;
  double stderr_ = 0.0;
  std::vector<double> lag_times;
  std::vector<double> autocorr;         // E[v(0).v(t)]
  std::vector<double> autocorr_stderr;
};

/// D = (1/3) int_0^horizon E[v(0).v(t)] dt for the stationary jump process
/// (v(0) ~ M_beta). The time integral is exact per path (velocities are
/// piecewise constant); the estimator is the mean over paths.
/// Requires horizon >= 10 mean jump times.
GreenKuboResult green_kubo_D(const KineticParams& params, std::size_t n_paths, double horizon,
                             RandomStream& rng);

struct MsdCurve {
  std::vector<double> times;
  std::vector<double> msd;
  std::vector<double> stderr_;
  double d_fit = 0.0;      // long-time slope / 6
  double d_stderr = 0.0;
  double fit_lo = 0.0, fit_hi = 0.0;
};

/// Mean squared displacement of unwrapped jump paths with a linear fit of the
/// window [fit_lo, fit_hi]; D = slope/6, error bars from 16 path blocks.
MsdCurve msd_estimate(const std::vector<boltz::JumpPath>& paths, double fit_lo, double fit_hi,
                      int n_times = 60);

}  // namespace kinlab::diff
