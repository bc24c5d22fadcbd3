#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "kinlab/md/phase_point.hpp"

namespace kinlab::md {

struct RecollisionStats {
  std::size_t recollision_count = 0;
  std::size_t total = 0;
};

/// Number of events whose unordered pair already appeared earlier in the log.
inline RecollisionStats recollision_stats(const EventLog& log) {
  RecollisionStats s;
  s.total = log.size();
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& ev : log) {
    const auto key = std::minmax(ev.i, ev.j);
    if (!seen.insert(key).second) ++s.recollision_count;
  }
  return s;
}

/// Collisions of the tagged particle in the backward slices
/// [t-k*tau, t-(k-1)*tau], k = 1..K. Requires K*tau <= t.
inline std::vector<std::size_t> tagged_collision_counts(const EventLog& log, std::uint32_t tagged,
                                                        double t, double tau, int K) {
  if (K * tau > t + 1e-12)
    throw std::invalid_argument("tagged_collision_counts: K*tau must not exceed t");
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  for (const auto& ev : log) {
    if (ev.i != tagged && ev.j != tagged) continue;
    const double back = t - ev.time;
    if (back < 0.0 || back >= K * tau) continue;
    int k = static_cast<int>(back / tau);  // slice k+1 counts (t-(k+1)tau, t-k tau]
    if (k >= K) k = K - 1;
    ++counts[static_cast<std::size_t>(k)];
  }
  return counts;
}

}  // namespace kinlab::md
