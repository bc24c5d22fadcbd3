#pragma once

#include <cstdint>
#include <cmath>

#include "kinlab/vec3.hpp"

namespace kinlab {

/// Seedable random stream with a reproducibility contract: identical
/// (seed, stream_id) give bitwise-identical draws on every platform, and
/// distinct stream ids are statistically independent. xoshiro256++ core with
/// splitmix64 state derivation; all distributions are generated in-house so
/// the sequences do not depend on any standard-library implementation.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1));
    for (auto& s : s_) s = splitmix64(z);
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ULL;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Derive an independent sub-stream (for per-run / per-worker randomness).
  RandomStream derive(std::uint64_t sub_id) const {
    return RandomStream(seed_ ^ (0xBF58476D1CE4E5B9ULL * (stream_id_ + 1)), sub_id);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1]; safe as a log argument.
  double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform on [a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (second value cached).
  double normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double phi = 6.283185307179586476925286766559 * uniform();
    cache_ = r * std::sin(phi);
    have_cache_ = true;
    return r * std::cos(phi);
  }

  Vec3 normal3() {
    const double a = normal(), b = normal(), c = normal();
    return {a, b, c};
  }

  /// Exponential waiting time with the given rate.
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  /// Uniform direction on the unit sphere.
  Vec3 unit_sphere() {
    const double c = 2.0 * uniform() - 1.0;
    const double s = std::sqrt(std::fmax(0.0, 1.0 - c * c));
    const double phi = 6.283185307179586476925286766559 * uniform();
    return {s * std::cos(phi), s * std::sin(phi), c};
  }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // bounded rejection keeps the draw exactly uniform
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& z) {
    z += 0x9E3779B97F4A7C15ULL;
    std::uint64_t r = z;
    r = (r ^ (r >> 30)) * 0xBF58476D1CE4E5B9ULL;
    r = (r ^ (r >> 27)) * 0x94D049BB133111EBULL;
    return r ^ (r >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
  bool have_cache_ = false;
  double cache_ = 0.0;
};

}  // namespace kinlab
