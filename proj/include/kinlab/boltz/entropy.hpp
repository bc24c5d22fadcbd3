#pragma once

#include <cstddef>

#include "kinlab/ensemble/histogram.hpp"

namespace kinlab::boltz {

/// Plug-in H = sum over occupied cells of mass * ln(mass / cell_volume);
/// empty cells contribute 0, the overflow bin is excluded.
double h_plugin(const ens::MarginalEstimate& est);

struct HEstimate {
  double value = 0.0;    // plug-in minus occupied/(2M) bias correction
  double stderr_ = 0.0;  // leave-one-out jackknife
  double plugin = 0.0;
  std::size_t occupied = 0;
};

/// Bias-corrected H with jackknife error bars; needs the estimate to carry
/// its ensemble size (counts are reconstructed as mass * M).
HEstimate h_estimate(const ens::MarginalEstimate& est);

/// Closed form for the Maxwellian on the unit torus:
/// H(M_beta) = (3/2) ln(beta/2pi) - 3/2.
double h_maxwellian(double beta);

}  // namespace kinlab::boltz
