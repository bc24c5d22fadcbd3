#pragma once

#include "kinlab/md/phase_point.hpp"
#include "kinlab/torus.hpp"

namespace kinlab::md {

/// Exact event-driven evolution of N elastic hard spheres on the torus.
///
/// Scheduling uses a priority queue of predicted pair contacts and cell
/// crossings with lazy invalidation counters; the broad phase is a cubic cell
/// list with cell side >= 2r, so pair predictions only scan neighboring
/// cells. Free flight between events. The function is deterministic in its
/// inputs: no randomness, no dependence on memory layout.
///
/// Every resolved collision is appended to `log` (absolute event times).
/// Throws TripleCollisionAbort when three or more particles reach mutual
/// contact within 1e-12, and OverlapInput when the input state violates the
/// non-overlap invariant.
PhasePoint evolve(const PhasePoint& state, double horizon, const TorusGeometry& geom,
                  EventLog* log = nullptr);

/// Reusable form for experiments that snapshot a trajectory repeatedly.
class EventDrivenSim {
 public:
  EventDrivenSim(PhasePoint state, const TorusGeometry& geom);
  ~EventDrivenSim();
  EventDrivenSim(const EventDrivenSim&) = delete;
  EventDrivenSim& operator=(const EventDrivenSim&) = delete;

  /// Advance the internal state by `horizon`.
  void advance(double horizon, EventLog* log = nullptr);

  /// Snapshot of the current microstate (positions reduced, clock included).
  PhasePoint state() const;

  /// Negate all velocities in place (R_N applied to the running state).
  void reverse_velocities();

  double time() const;

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace kinlab::md
