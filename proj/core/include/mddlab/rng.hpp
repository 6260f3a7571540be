#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace mddlab {

/// SplitMix64 step; used to expand a single 64-bit seed into generator state.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256** seeded through SplitMix64.
///
/// Every stochastic routine in the library draws from this generator so that
/// streams are bit-reproducible across platforms and standard libraries.
/// Gaussian variates come from the Box-Muller transform; the second variate of
/// each pair is cached.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept;

  /// Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal variate.
  double normal() noexcept;

  /// +1 or -1 with equal probability.
  int sign() noexcept { return (next_u64() >> 63) != 0 ? 1 : -1; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_normal_;
};

/// Seed for the `index`-th independent sub-stream of `seed` (trials, resamples).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace mddlab
