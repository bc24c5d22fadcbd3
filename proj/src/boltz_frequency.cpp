#include "kinlab/boltz/frequency.hpp"

#include "kinlab/errors.hpp"

namespace kinlab::boltz {

PostCollisionDraw sample_post_collision_draw(const Vec3& v, const KineticParams& p,
                                             RandomStream& rng) {
  double envelope = norm(v) + 6.0 / std::sqrt(p.beta);
  for (long tries = 1; tries <= 2'000'000; ++tries) {
    const Vec3 vstar = sample_maxwellian(p.beta, rng);
    const double rel = norm(v - vstar);
    if (rel > envelope) {
      envelope *= 2.0;  // envelope violated: double and redraw
      continue;
    }
    if (rng.uniform() * envelope > rel) continue;
    if (rel == 0.0) continue;
    // n on the hemisphere (u.n) > 0 with density prop. to u.n
    const Vec3 u = v - vstar;
    Vec3 e1, e2;
    orthonormal_frame(u, e1, e2);
    const double ct = std::sqrt(rng.uniform());
    const double st = std::sqrt(std::fmax(0.0, 1.0 - ct * ct));
    const double phi = 2.0 * kPi * rng.uniform();
    const Vec3 n = ct * (1.0 / rel) * u + st * (std::cos(phi) * e1 + std::sin(phi) * e2);
    const double q = dot(u, n);
    PostCollisionDraw d;
    d.v_star = vstar;
    d.normal = n;
    d.v_out = v - q * n;
    d.v_star_out = vstar + q * n;
    return d;
  }
  throw RejectionStall("sample_post_collision: acceptance rate below 1e-6");
}

}  // namespace kinlab::boltz
