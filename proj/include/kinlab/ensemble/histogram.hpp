#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "kinlab/ensemble/density_spec.hpp"
#include "kinlab/errors.hpp"
#include "kinlab/md/phase_point.hpp"
#include "kinlab/rng.hpp"

namespace kinlab::ens {

/// Cubic cell partitions: pos_bins^3 cells over [0,lambda)^3 and vel_bins^3
/// cells over [-vmax, vmax]^3 per particle. pos_bins = 1 collapses positions
/// (velocity-only statistics).
struct GridSpec {
  int pos_bins = 16;
  int vel_bins = 24;
  double vmax = 4.0;

  bool operator==(const GridSpec& o) const {
    return pos_bins == o.pos_bins && vel_bins == o.vel_bins && vmax == o.vmax;
  }
};

/// Empirical k-particle marginal on a sparse grid. Weights sum to 1 together
/// with the overflow mass (samples with a velocity component beyond vmax).
struct MarginalEstimate {
  int order = 1;
  double lambda = 1.0;
  GridSpec grid;
  std::size_t ensemble_size = 0;
  std::unordered_map<std::uint64_t, double> weights;  // cell key -> mass
  double overflow_mass = 0.0;

  double pos_cell_volume() const {
    const double w = lambda / grid.pos_bins;
    return w * w * w;
  }
  double vel_cell_volume() const {
    const double w = 2.0 * grid.vmax / grid.vel_bins;
    return w * w * w;
  }
  /// Phase-space volume of one cell (order-fold product).
  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < order; ++k) v *= pos_cell_volume() * vel_cell_volume();
    return v;
  }
};

/// Accumulates (x, v) tuples into a MarginalEstimate; normalize() finishes.
class MarginalAccumulator {
 public:
  MarginalAccumulator(int order, const GridSpec& grid, double lambda);

  /// One sample of `order` particles (arrays of length `order`).
  void add(const Vec3* xs, const Vec3* vs);
  void add(const Vec3& x, const Vec3& v) { add(&x, &v); }

  MarginalEstimate finish() const;  // throws EmptyEnsemble if nothing added

  static int key_bits(int order, const GridSpec& grid);

 private:
  MarginalEstimate est_;
  double count_ = 0.0;
  double overflow_count_ = 0.0;
};

/// Marginal of the first k particles over an ensemble of microstates.
/// pool_background additionally folds particles 2..N into a k=1 estimate
/// (valid for exchangeable data).
MarginalEstimate estimate_marginal(std::span<const md::PhasePoint> ensemble, int order,
                                   const GridSpec& grid, double lambda,
                                   bool pool_background = false);

/// L1 distance between two estimates on identical grids; in [0, 2].
double l1_distance(const MarginalEstimate& a, const MarginalEstimate& b);

/// Exact product reference: uniform positions x Maxwellian velocities (k = 1).
MarginalEstimate maxwellian_reference(const GridSpec& grid, double lambda, double beta);

/// Product of the k=1 marginals of `a` (for the k=2 factorization defect).
MarginalEstimate product_of_singles(const MarginalEstimate& a1, const MarginalEstimate& a2);

/// Mean L1 distance between two multinomial resamples of `law` at the given
/// sample sizes: the pure sampling-noise baseline for l1_distance values.
double l1_noise_floor(const MarginalEstimate& law, std::size_t size_a, std::size_t size_b,
                      int n_boot, RandomStream& rng);

/// CSV: one row per occupied cell (indices, centers, mass), header with grid
/// metadata; rows sorted by cell key so output is byte-stable.
void write_marginal_csv(std::ostream& os, const MarginalEstimate& est);

}  // namespace kinlab::ens
