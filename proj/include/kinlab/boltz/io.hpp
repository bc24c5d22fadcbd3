#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "kinlab/boltz/jump_process.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab::boltz {

/// One sample of a kinetic time series (H value plus the conserved moments of
/// the particle representation).
struct KineticSeriesRow {
  double t = 0.0;
  double h = 0.0;
  double h_stderr = 0.0;
  Vec3 momentum;
  double energy = 0.0;
  double overflow_mass = 0.0;
};

/// CSV: t, h, h_stderr, px, py, pz, energy, overflow_mass (17 digits).
void write_kinetic_series_csv(std::ostream& os, std::span<const KineticSeriesRow> rows);

/// CSV dump of jump paths: path id, then one row per node
/// (initial point, every jump, final point): path, time, x, y, z, vx, vy, vz.
void write_jump_paths_csv(std::ostream& os, std::span<const JumpPath> paths);

}  // namespace kinlab::boltz
