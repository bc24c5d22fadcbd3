#pragma once

#include "kinlab/expt/config.hpp"
#include "kinlab/expt/report.hpp"

namespace kinlab::expt {

/// Fill defaults for the given experiment name (existing keys are kept).
Config with_defaults(Config cfg, const std::string& experiment);

/// Hard-sphere ensembles against the spatially uniform DSMC reference over an
/// N-sweep at fixed gamma (velocity-marginal L1 distances plus the pair
/// factorization defect).
Report run_lanford(const Config& cfg);

/// Tagged-particle ensembles against the velocity-jump reference on an
/// (x1, v1) grid, with the equilibrium-band monitor.
Report run_linear(const Config& cfg);

/// Diffusion pipeline: Fredholm D, Green-Kubo and MSD cross-checks, the
/// diffusive-rescaling sweep, and Brownian increment diagnostics.
Report run_diffusion(const Config& cfg);

/// Velocity-reversal experiment: microscopic H return versus continued DSMC
/// H decay after reflecting velocities mid-run.
Report run_reversal(const Config& cfg);

/// Recollision fractions, tagged slice counts and exceedance fractions, and
/// the mean collision rate against the equilibrium prediction.
Report run_collision_stats(const Config& cfg);

/// Just the D triangulation (the `dcoeff` subcommand).
Report run_dcoeff(const Config& cfg);

}  // namespace kinlab::expt
