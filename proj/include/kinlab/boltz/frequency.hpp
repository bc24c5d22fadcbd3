#pragma once

#include <cmath>

#include "kinlab/maxwellian.hpp"
#include "kinlab/params.hpp"
#include "kinlab/rng.hpp"
#include "kinlab/vec3.hpp"

namespace kinlab::boltz {

/// Loss rate against the Maxwellian background:
///   nu(v) = gamma * pi * E_{v* ~ M_beta} |v - v*|
/// (the sphere integral of (u.n)_+ equals pi|u|). Closed form via the mean of
/// a noncentral chi distribution; series expansion near |v| = 0.
inline double collision_frequency(const Vec3& v, const KineticParams& p) {
  const double a = norm(v) * std::sqrt(p.beta);  // speed in thermal units
  double g;
  if (a < 1e-4) {
    g = std::sqrt(2.0 / kPi) * (2.0 + a * a / 3.0);
  } else {
    g = std::sqrt(2.0 / kPi) * std::exp(-0.5 * a * a) + (a + 1.0 / a) * std::erf(a / std::sqrt(2.0));
  }
  return p.gamma * kPi / std::sqrt(p.beta) * g;
}

/// E_{M_beta}[nu(v)] = gamma * pi * E|v - v*| with both Maxwellian
///                   = 4 * gamma * sqrt(pi/beta).
inline double mean_collision_rate(const KineticParams& p) {
  return 4.0 * p.gamma * std::sqrt(kPi / p.beta);
}

/// Expected time between collisions of a thermal particle.
inline double mean_free_time(const KineticParams& p) { return 1.0 / mean_collision_rate(p); }

inline double mean_free_path(const KineticParams& p) {
  return maxwellian_mean_speed(p.beta) * mean_free_time(p);
}

/// Rate majorant used for thinning: gamma*pi*(|v| + 2/sqrt(beta)) >= nu(v),
/// since E|v - v*| <= |v| + E|v*| and E|v*| = sqrt(8/(pi beta)) < 2/sqrt(beta).
inline double frequency_majorant(const Vec3& v, const KineticParams& p) {
  return p.gamma * kPi * (norm(v) + 2.0 / std::sqrt(p.beta));
}

/// Full outcome of a background collision draw.
struct PostCollisionDraw {
  Vec3 v_out;       // post-collision velocity of the particle
  Vec3 v_star;      // background partner before the exchange
  Vec3 v_star_out;  // partner after the exchange
  Vec3 normal;
};

/// Draw (v*, n) with density proportional to M_beta(v*) ((v-v*).n)_+ and
/// return v' = v - ((v-v*).n) n. The induced kernel is in detailed balance
/// with M_beta. Rejection envelope |v| + 6/sqrt(beta) for the speed weight,
/// doubled adaptively if exceeded; throws RejectionStall if the acceptance
/// rate falls below 1e-6.
PostCollisionDraw sample_post_collision_draw(const Vec3& v, const KineticParams& p,
                                             RandomStream& rng);

inline Vec3 sample_post_collision(const Vec3& v, const KineticParams& p, RandomStream& rng) {
  return sample_post_collision_draw(v, p, rng).v_out;
}

}  // namespace kinlab::boltz
