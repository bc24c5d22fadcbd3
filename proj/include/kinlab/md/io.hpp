#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "kinlab/md/phase_point.hpp"

namespace kinlab::md {

/// Checkpoint CSV: header line (N, r, lambda, t, seed), then one row per
/// particle (index, x, y, z, vx, vy, vz), 17 significant digits throughout.
void write_checkpoint(std::ostream& os, const PhasePoint& state, double lambda,
                      std::uint64_t seed);
PhasePoint read_checkpoint(std::istream& is, double* lambda_out = nullptr,
                           std::uint64_t* seed_out = nullptr);

/// Trajectory dump: one CSV row per collision event
/// (time, i, j, nx, ny, nz, pre/post velocities).
void write_trajectory(std::ostream& os, const EventLog& log);

}  // namespace kinlab::md
