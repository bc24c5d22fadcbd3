#include "kinlab/boltz/entropy.hpp"

#include <cmath>

#include "kinlab/maxwellian.hpp"

namespace kinlab::boltz {

double h_plugin(const ens::MarginalEstimate& est) {
  const double vol = est.cell_volume();
  double h = 0.0;
  for (const auto& [k, m] : est.weights)
    if (m > 0.0) h += m * std::log(m / vol);
  return h;
}

HEstimate h_estimate(const ens::MarginalEstimate& est) {
  const double vol = est.cell_volume();
  const double m_total = static_cast<double>(est.ensemble_size);
  if (m_total < 2.0) throw EmptyEnsemble("h_estimate: need ensemble_size >= 2");

  HEstimate out;
  out.plugin = h_plugin(est);
  std::size_t occupied = 0;
  // A = sum n_c ln(n_c / vol); plug-in H = A/M - ln M
  double a_sum = 0.0;
  for (const auto& [k, m] : est.weights) {
    if (m <= 0.0) continue;
    ++occupied;
    const double n = m * m_total;
    a_sum += n * std::log(n / vol);
  }
  out.occupied = occupied;
  out.value = out.plugin - static_cast<double>(occupied) / (2.0 * m_total);

  // leave-one-out jackknife over samples, grouped by cell
  const double m1 = m_total - 1.0;
  const double log_m1 = std::log(m1);
  double jk_mean = 0.0;
  std::vector<std::pair<double, double>> loo;  // (count, H_without_one_of_this_cell)
  loo.reserve(occupied + 1);
  for (const auto& [k, m] : est.weights) {
    if (m <= 0.0) continue;
    const double n = m * m_total;
    double a_loo = a_sum - n * std::log(n / vol);
    if (n > 1.0) a_loo += (n - 1.0) * std::log((n - 1.0) / vol);
    const double h_loo = a_loo / m1 - log_m1;
    loo.emplace_back(n, h_loo);
    jk_mean += n * h_loo;
  }
  const double n_overflow = est.overflow_mass * m_total;
  if (n_overflow > 0.0) {
    const double h_loo = a_sum / m1 - log_m1;
    loo.emplace_back(n_overflow, h_loo);
    jk_mean += n_overflow * h_loo;
  }
  jk_mean /= m_total;
  double var = 0.0;
  for (const auto& [n, h] : loo) var += n * (h - jk_mean) * (h - jk_mean);
  var *= m1 / m_total;
  out.stderr_ = std::sqrt(var);
  return out;
}

double h_maxwellian(double beta) { return 1.5 * std::log(beta / (2.0 * kPi)) - 1.5; }

}  // namespace kinlab::boltz
