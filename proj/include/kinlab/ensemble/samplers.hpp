#pragma once

#include "kinlab/ensemble/density_spec.hpp"
#include "kinlab/md/phase_point.hpp"
#include "kinlab/params.hpp"
#include "kinlab/rng.hpp"

namespace kinlab::ens {

/// Uniform on the admissible set (non-overlapping spheres), Maxwellian
/// velocities: sequential insertion with rejection. Restarts the whole
/// configuration after 1e4 consecutive failures on one particle; throws
/// PackingStall after 1e6 cumulative tries for a single slot.
md::PhasePoint sample_equilibrium(const ScalingParams& scaling, double beta, RandomStream& rng);

/// Product data prod_k f_in(x_k, v_k) conditioned on non-overlap
/// (sequential rejection against previously placed spheres).
md::PhasePoint sample_chaotic(const DensitySpec& f_in, const ScalingParams& scaling,
                              RandomStream& rng);

/// Tagged data: particle 0 from the normalized profile times M_beta, particles
/// 1..N-1 from equilibrium; exclusion enforced by rejection.
md::PhasePoint sample_tagged(const DensitySpec& phi_in, const ScalingParams& scaling,
                             RandomStream& rng);

}  // namespace kinlab::ens
