#include "kinlab/diffusion/green_kubo.hpp"

#include <cmath>
#include <stdexcept>

#include "kinlab/boltz/frequency.hpp"
#include "kinlab/maxwellian.hpp"

namespace kinlab::diff {

GreenKuboResult green_kubo_D(const KineticParams& params, std::size_t n_paths, double horizon,
                             RandomStream& rng) {
  params.validate();
  const double tau = boltz::mean_free_time(params);
  if (horizon < 10.0 * tau)
    throw std::invalid_argument("green_kubo_D: horizon must cover >= 10 mean jump times");
  if (n_paths < 2) throw std::invalid_argument("green_kubo_D: n_paths >= 2");

  const int n_lag = 80;
  const double dt_lag = horizon / n_lag;

  GreenKuboResult out;
  out.lag_times.resize(n_lag + 1);
  for (int k = 0; k <= n_lag; ++k) out.lag_times[static_cast<std::size_t>(k)] = k * dt_lag;
  std::vector<double> acf(n_lag + 1, 0.0), acf2(n_lag + 1, 0.0);

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    const Vec3 v0 = sample_maxwellian(params.beta, rng);
    // velocity-only path; positions are irrelevant for the autocorrelation
    double t = 0.0;
    Vec3 v = v0;
    double integral = 0.0;
    int lag = 0;
    std::vector<double> path_acf(n_lag + 1, 0.0);
    double majorant = boltz::frequency_majorant(v, params);
    while (t < horizon) {
      double dt = rng.exponential(majorant);
      bool jump = false;
      if (t + dt > horizon) {
        dt = horizon - t;
      } else {
        const double nu = boltz::collision_frequency(v, params);
        jump = rng.uniform() * majorant <= nu;
      }
      // exact segment integral of v0.v(t), plus grid samples for the curve
      integral += dot(v0, v) * dt;
      while (lag <= n_lag && out.lag_times[static_cast<std::size_t>(lag)] <= t + dt + 1e-15) {
        path_acf[static_cast<std::size_t>(lag)] = dot(v0, v);
        ++lag;
      }
      t += dt;
      if (jump) {
        v = boltz::sample_post_collision(v, params, rng);
        majorant = boltz::frequency_majorant(v, params);
      }
    }
    const double d_p = integral / 3.0;
    sum += d_p;
    sum2 += d_p * d_p;
    for (int k = 0; k <= n_lag; ++k) {
      acf[static_cast<std::size_t>(k)] += path_acf[static_cast<std::size_t>(k)];
      acf2[static_cast<std::size_t>(k)] += path_acf[static_cast<std::size_t>(k)] * path_acf[static_cast<std::size_t>(k)];
    }
  }
  const double n = static_cast<double>(n_paths);
  out.d = sum / n;
  out.stderr_ = std::sqrt(std::fmax(0.0, sum2 / n - out.d * out.d) / n);
  out.autocorr.resize(n_lag + 1);
  out.autocorr_stderr.resize(n_lag + 1);
  for (int k = 0; k <= n_lag; ++k) {
    const double m = acf[static_cast<std::size_t>(k)] / n;
    out.autocorr[static_cast<std::size_t>(k)] = m;
    out.autocorr_stderr[static_cast<std::size_t>(k)] =
        std::sqrt(std::fmax(0.0, acf2[static_cast<std::size_t>(k)] / n - m * m) / n);
  }
  return out;
}

MsdCurve msd_estimate(const std::vector<boltz::JumpPath>& paths, double fit_lo, double fit_hi,
                      int n_times) {
  if (paths.size() < 16) throw std::invalid_argument("msd_estimate: need >= 16 paths");
  double t_max = paths.front().final_time;
  for (const auto& p : paths) t_max = std::fmin(t_max, p.final_time);
  if (!(fit_lo >= 0.0 && fit_hi > fit_lo && fit_hi <= t_max + 1e-12))
    throw std::invalid_argument("msd_estimate: fit window outside simulated horizon");

  MsdCurve out;
  out.fit_lo = fit_lo;
  out.fit_hi = fit_hi;
  out.times.resize(static_cast<std::size_t>(n_times) + 1);
  for (int k = 0; k <= n_times; ++k)
    out.times[static_cast<std::size_t>(k)] = t_max * k / n_times;

  const std::size_t np = paths.size();
  std::vector<double> s1(out.times.size(), 0.0), s2(out.times.size(), 0.0);
  // per-block accumulators for the fit error bars
  const int n_blocks = 16;
  std::vector<std::vector<double>> block_sum(n_blocks,
                                             std::vector<double>(out.times.size(), 0.0));
  std::vector<std::size_t> block_count(n_blocks, 0);

  for (std::size_t p = 0; p < np; ++p) {
    const int b = static_cast<int>(p % n_blocks);
    ++block_count[static_cast<std::size_t>(b)];
    for (std::size_t k = 0; k < out.times.size(); ++k) {
      const Vec3 dx = paths[p].position_at(out.times[k]) - paths[p].x0;
      const double r2 = norm2(dx);
      s1[k] += r2;
      s2[k] += r2 * r2;
      block_sum[static_cast<std::size_t>(b)][k] += r2;
    }
  }
  out.msd.resize(out.times.size());
  out.stderr_.resize(out.times.size());
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    const double m = s1[k] / static_cast<double>(np);
    out.msd[k] = m;
    out.stderr_[k] =
        std::sqrt(std::fmax(0.0, s2[k] / static_cast<double>(np) - m * m) / static_cast<double>(np));
  }

  auto slope_of = [&](const std::vector<double>& msd_curve) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (std::size_t k = 0; k < out.times.size(); ++k) {
      const double t = out.times[k];
      if (t < fit_lo || t > fit_hi) continue;
      sx += t;
      sy += msd_curve[k];
      sxx += t * t;
      sxy += t * msd_curve[k];
      ++cnt;
    }
    if (cnt < 2) throw std::invalid_argument("msd_estimate: fit window holds < 2 grid times");
    return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  };

  out.d_fit = slope_of(out.msd) / 6.0;
  double bm = 0.0, bv = 0.0;
  std::vector<double> block_d(n_blocks);
  for (int b = 0; b < n_blocks; ++b) {
    std::vector<double> curve(out.times.size());
    for (std::size_t k = 0; k < out.times.size(); ++k)
      curve[k] = block_sum[static_cast<std::size_t>(b)][k] /
                 static_cast<double>(block_count[static_cast<std::size_t>(b)]);
    block_d[static_cast<std::size_t>(b)] = slope_of(curve) / 6.0;
    bm += block_d[static_cast<std::size_t>(b)];
  }
  bm /= n_blocks;
  for (int b = 0; b < n_blocks; ++b)
    bv += (block_d[static_cast<std::size_t>(b)] - bm) * (block_d[static_cast<std::size_t>(b)] - bm);
  out.d_stderr = std::sqrt(bv / (n_blocks - 1.0) / n_blocks);
  return out;
}

}  // namespace kinlab::diff
