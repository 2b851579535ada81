#pragma once

#include <cstdint>
#include <limits>

namespace corrbound {

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: the i-th output is mix64(key + (i + 1) * gamma).
///
/// Streams are addressed by (seed, stream id) so every trajectory, split and
/// bootstrap resample owns an independent sequence whose values do not depend
/// on the order in which streams are consumed. Satisfies
/// UniformRandomBitGenerator, but the library never routes it through
/// <random> distributions: those are not bit-portable across standard
/// libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  /// Stream `stream` of the family rooted at `seed`.
  static CounterRng for_stream(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// 53-bit uniform on [0, 1).
  double uniform01() noexcept;

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;

  /// Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace corrbound
