#pragma once

#include <array>
#include <cstdint>

namespace rffrc {

/// Deterministic pseudo-random generator used everywhere randomness is
/// needed (feature sampling, measurement noise, test fixtures).
///
/// The generator is xoshiro256** seeded through splitmix64, so any
/// 64-bit seed yields a well-mixed state.  Gaussians come from the
/// Box-Muller transform with the second draw of each pair cached.  The
/// exact draw order is part of the reproducibility contract and is
/// documented in the README, so ports to other languages can replay
/// identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Next raw 64-bit word of the xoshiro256** stream.
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform01();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal deviate.  Each Box-Muller pair consumes exactly
  /// two uniforms; the sine branch is cached and returned on the next
  /// call, the cosine branch is returned first.
  double normal();

  /// Normal deviate with the given mean and standard deviation.
  double normal(double mean, double stddev);

 private:
  std::array<std::uint64_t, 4> state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace rffrc
