#pragma once

#include <vector>

#include "kinlab/ensemble/density_spec.hpp"
#include "kinlab/params.hpp"
#include "kinlab/rng.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab::boltz {

/// Particle representation of a kinetic density f(t, x, v): M sample points
/// of weight 1/M on the torus of side lambda, with the spatial cell partition
/// used for collision pairing. Majorants and fractional candidate carries are
/// per-cell state so stepping is deterministic.
struct DistributionState {
  std::vector<Vec3> pos;
  std::vector<Vec3> vel;
  double time = 0.0;
  double lambda = 1.0;
  double gamma = 1.0;
  int cells_per_axis = 1;
  std::vector<double> majorant;   // per-cell relative-speed bound
  std::vector<double> carry;      // per-cell fractional candidate remainder

  std::size_t size() const { return pos.size(); }
};

/// M samples drawn from a product one-particle density (uniform or profiled
/// positions times the velocity law). cells_per_axis = 0 picks the default
/// mean-free-path / 2 cell size, clamped so cells hold >= 20 samples.
DistributionState make_dsmc_state(const ens::DensitySpec& f_in, std::size_t n_samples,
                                  double lambda, double gamma, int cells_per_axis,
                                  RandomStream& rng);

/// One DSMC step: no-time-counter candidate selection per cell, acceptance
/// with probability |v_i - v_j| / majorant, elastic exchange along a
/// cos-weighted hemisphere normal, then free streaming on the torus.
/// If an observed relative speed exceeds the cell majorant the step is
/// retried from scratch with the majorant doubled. Requires
/// dt <= 0.2 x (mean free time estimated from the current samples).
DistributionState dsmc_step(DistributionState state, double dt, RandomStream& rng);

/// Crude mean-free-time estimate from the sample mean speed (used for the
/// dt precondition and default discretizations).
double estimate_mean_free_time(const DistributionState& state);

}  // namespace kinlab::boltz
