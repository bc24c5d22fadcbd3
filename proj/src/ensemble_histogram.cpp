#include "kinlab/ensemble/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "kinlab/maxwellian.hpp"
#include "kinlab/torus.hpp"

namespace kinlab::ens {
namespace {

int bits_for(int bins) {
  int b = 1;
  while ((1 << b) < bins) ++b;
  return b;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int MarginalAccumulator::key_bits(int order, const GridSpec& grid) {
  return order * 3 * (bits_for(grid.pos_bins) + bits_for(grid.vel_bins));
}

MarginalAccumulator::MarginalAccumulator(int order, const GridSpec& grid, double lambda) {
  if (order < 1 || order > 2)
    throw std::invalid_argument("MarginalAccumulator: order must be 1 or 2");
  if (grid.pos_bins < 1 || grid.vel_bins < 1 || !(grid.vmax > 0.0))
    throw std::invalid_argument("MarginalAccumulator: bad grid");
  if (key_bits(order, grid) > 64)
    throw std::invalid_argument("MarginalAccumulator: grid too fine for order-2 keys");
  est_.order = order;
  est_.lambda = lambda;
  est_.grid = grid;
}

void MarginalAccumulator::add(const Vec3* xs, const Vec3* vs) {
  const int pb = est_.grid.pos_bins, vb = est_.grid.vel_bins;
  const int pbits = bits_for(pb), vbits = bits_for(vb);
  const double pw = est_.lambda / pb;
  const double vw = 2.0 * est_.grid.vmax / vb;
  const TorusGeometry geom{est_.lambda};

  std::uint64_t key = 0;
  for (int k = 0; k < est_.order; ++k) {
    const Vec3 x = geom.wrap(xs[k]);
    const Vec3& v = vs[k];
    for (int a = 0; a < 3; ++a) {
      int ip = static_cast<int>(x[a] / pw);
      if (ip >= pb) ip = pb - 1;
      key = (key << pbits) | static_cast<std::uint64_t>(ip);
    }
    for (int a = 0; a < 3; ++a) {
      const double s = v[a] + est_.grid.vmax;
      if (s < 0.0 || s >= 2.0 * est_.grid.vmax) {
        overflow_count_ += 1.0;
        count_ += 1.0;
        return;
      }
      int iv = static_cast<int>(s / vw);
      if (iv >= vb) iv = vb - 1;
      key = (key << vbits) | static_cast<std::uint64_t>(iv);
    }
  }
  est_.weights[key] += 1.0;
  count_ += 1.0;
}

MarginalEstimate MarginalAccumulator::finish() const {
  if (count_ <= 0.0) throw EmptyEnsemble("estimate_marginal: no samples accumulated");
  MarginalEstimate out = est_;
  out.ensemble_size = static_cast<std::size_t>(count_);
  for (auto& [k, w] : out.weights) w /= count_;
  out.overflow_mass = overflow_count_ / count_;
  return out;
}

MarginalEstimate estimate_marginal(std::span<const md::PhasePoint> ensemble, int order,
                                   const GridSpec& grid, double lambda, bool pool_background) {
  if (ensemble.empty()) throw EmptyEnsemble("estimate_marginal: empty ensemble");
  MarginalAccumulator acc(order, grid, lambda);
  for (const auto& state : ensemble) {
    if (state.size() < static_cast<std::size_t>(order))
      throw std::invalid_argument("estimate_marginal: state smaller than marginal order");
    if (order == 1) {
      if (pool_background) {
        for (std::size_t i = 0; i < state.size(); ++i) acc.add(state.pos[i], state.vel[i]);
      } else {
        acc.add(state.pos[0], state.vel[0]);
      }
    } else {
      Vec3 xs[2] = {state.pos[0], state.pos[1]};
      Vec3 vs[2] = {state.vel[0], state.vel[1]};
      acc.add(xs, vs);
    }
  }
  return acc.finish();
}

double l1_distance(const MarginalEstimate& a, const MarginalEstimate& b) {
  if (a.order != b.order || !(a.grid == b.grid) || a.lambda != b.lambda)
    throw GridMismatch("l1_distance: estimates on different grids");
  double s = std::fabs(a.overflow_mass - b.overflow_mass);
  for (const auto& [k, w] : a.weights) {
    const auto it = b.weights.find(k);
    s += std::fabs(w - (it == b.weights.end() ? 0.0 : it->second));
  }
  for (const auto& [k, w] : b.weights)
    if (a.weights.find(k) == a.weights.end()) s += w;
  return s;
}

MarginalEstimate maxwellian_reference(const GridSpec& grid, double lambda, double beta) {
  const long total = static_cast<long>(grid.pos_bins) * grid.pos_bins * grid.pos_bins *
                     grid.vel_bins * grid.vel_bins * grid.vel_bins;
  if (total > (1L << 22))
    throw std::invalid_argument("maxwellian_reference: grid too large to enumerate");
  const int pb = grid.pos_bins, vb = grid.vel_bins;
  const int pbits = bits_for(pb), vbits = bits_for(vb);

  std::vector<double> axis_mass(vb);
  const double vw = 2.0 * grid.vmax / vb;
  double inside = 0.0;
  for (int i = 0; i < vb; ++i) {
    axis_mass[i] = maxwellian_interval_mass(-grid.vmax + i * vw, -grid.vmax + (i + 1) * vw, beta);
    inside += axis_mass[i];
  }

  MarginalEstimate est;
  est.order = 1;
  est.lambda = lambda;
  est.grid = grid;
  est.ensemble_size = 0;
  est.overflow_mass = 1.0 - inside * inside * inside;
  const double pmass = 1.0 / (static_cast<double>(pb) * pb * pb);
  for (int px = 0; px < pb; ++px)
    for (int py = 0; py < pb; ++py)
      for (int pz = 0; pz < pb; ++pz)
        for (int ix = 0; ix < vb; ++ix)
          for (int iy = 0; iy < vb; ++iy)
            for (int iz = 0; iz < vb; ++iz) {
              std::uint64_t key = 0;
              key = (key << pbits) | static_cast<std::uint64_t>(px);
              key = (key << pbits) | static_cast<std::uint64_t>(py);
              key = (key << pbits) | static_cast<std::uint64_t>(pz);
              key = (key << vbits) | static_cast<std::uint64_t>(ix);
              key = (key << vbits) | static_cast<std::uint64_t>(iy);
              key = (key << vbits) | static_cast<std::uint64_t>(iz);
              const double m = pmass * axis_mass[ix] * axis_mass[iy] * axis_mass[iz];
              if (m > 0.0) est.weights[key] = m;
            }
  return est;
}

MarginalEstimate product_of_singles(const MarginalEstimate& a1, const MarginalEstimate& a2) {
  if (!(a1.grid == a2.grid) || a1.lambda != a2.lambda || a1.order != 1 || a2.order != 1)
    throw GridMismatch("product_of_singles: need two k=1 estimates on the same grid");
  const int bits = MarginalAccumulator::key_bits(1, a1.grid);
  MarginalEstimate est;
  est.order = 2;
  est.lambda = a1.lambda;
  est.grid = a1.grid;
  est.ensemble_size = std::min(a1.ensemble_size, a2.ensemble_size);
  if (2 * bits > 64) throw std::invalid_argument("product_of_singles: grid too fine for order 2");
  for (const auto& [k1, w1] : a1.weights)
    for (const auto& [k2, w2] : a2.weights) {
      const double w = w1 * w2;
      if (w > 0.0) est.weights[(k1 << bits) | k2] += w;
    }
  est.overflow_mass =
      1.0 - (1.0 - a1.overflow_mass) * (1.0 - a2.overflow_mass);
  return est;
}

double l1_noise_floor(const MarginalEstimate& law, std::size_t size_a, std::size_t size_b,
                      int n_boot, RandomStream& rng) {
  // categorical sampling over the law's cells (overflow as a trailing slot)
  std::vector<std::uint64_t> keys;
  std::vector<double> cdf;
  keys.reserve(law.weights.size());
  double acc = 0.0;
  for (const auto& [k, w] : law.weights) {
    keys.push_back(k);
    acc += w;
    cdf.push_back(acc);
  }
  const double total = acc + law.overflow_mass;

  auto draw_hist = [&](std::size_t m, std::unordered_map<std::uint64_t, double>& h,
                       double& overflow) {
    h.clear();
    overflow = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      const double u = rng.uniform() * total;
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end())
        overflow += 1.0;
      else
        h[keys[static_cast<std::size_t>(it - cdf.begin())]] += 1.0;
    }
    for (auto& [k, w] : h) w /= static_cast<double>(m);
    overflow /= static_cast<double>(m);
  };

  double mean = 0.0;
  std::unordered_map<std::uint64_t, double> ha, hb;
  for (int b = 0; b < n_boot; ++b) {
    double ova = 0.0, ovb = 0.0;
    draw_hist(size_a, ha, ova);
    draw_hist(size_b, hb, ovb);
    double s = std::fabs(ova - ovb);
    for (const auto& [k, w] : ha) {
      const auto it = hb.find(k);
      s += std::fabs(w - (it == hb.end() ? 0.0 : it->second));
    }
    for (const auto& [k, w] : hb)
      if (ha.find(k) == ha.end()) s += w;
    mean += s;
  }
  return mean / n_boot;
}

void write_marginal_csv(std::ostream& os, const MarginalEstimate& est) {
  const int pb = est.grid.pos_bins, vb = est.grid.vel_bins;
  const int pbits = bits_for(pb), vbits = bits_for(vb);
  const double pw = est.lambda / pb;
  const double vw = 2.0 * est.grid.vmax / vb;

  os << "# order=" << est.order << " lambda=" << g17(est.lambda) << " pos_bins=" << pb
     << " vel_bins=" << vb << " vmax=" << g17(est.grid.vmax)
     << " ensemble=" << est.ensemble_size << " overflow=" << g17(est.overflow_mass) << "\n";
  os << "cell";
  for (int k = 0; k < est.order; ++k)
    os << ",ix" << k << ",iy" << k << ",iz" << k << ",jvx" << k << ",jvy" << k << ",jvz" << k;
  for (int k = 0; k < est.order; ++k)
    os << ",x" << k << ",y" << k << ",z" << k << ",vx" << k << ",vy" << k << ",vz" << k;
  os << ",mass\n";

  std::vector<std::uint64_t> keys;
  keys.reserve(est.weights.size());
  for (const auto& [k, w] : est.weights) keys.push_back(k);
  std::sort(keys.begin(), keys.end());

  for (const auto key : keys) {
    // unpack back-to-front
    std::vector<int> idx(static_cast<std::size_t>(est.order) * 6);
    std::uint64_t k = key;
    for (int p = est.order - 1; p >= 0; --p) {
      for (int a = 2; a >= 0; --a) {
        idx[static_cast<std::size_t>(p) * 6 + 3 + a] = static_cast<int>(k & ((1u << vbits) - 1));
        k >>= vbits;
      }
      for (int a = 2; a >= 0; --a) {
        idx[static_cast<std::size_t>(p) * 6 + a] = static_cast<int>(k & ((1u << pbits) - 1));
        k >>= pbits;
      }
    }
    os << key;
    for (const int i : idx) os << ',' << i;
    for (int p = 0; p < est.order; ++p) {
      for (int a = 0; a < 3; ++a)
        os << ',' << g17((idx[static_cast<std::size_t>(p) * 6 + a] + 0.5) * pw);
      for (int a = 0; a < 3; ++a)
        os << ','
           << g17(-est.grid.vmax + (idx[static_cast<std::size_t>(p) * 6 + 3 + a] + 0.5) * vw);
    }
    os << ',' << g17(est.weights.at(key)) << "\n";
  }
}

}  // namespace kinlab::ens
