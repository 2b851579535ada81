#include "corrbound/rng.hpp"

namespace corrbound {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStreamSalt = 0xd1b54a32d192ed03ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

CounterRng CounterRng::for_stream(std::uint64_t seed, std::uint64_t stream) noexcept {
  // Two rounds so that nearby (seed, stream) pairs land on unrelated keys.
  return CounterRng(mix64(mix64(seed + kGamma) ^ mix64(stream * kStreamSalt + kGamma)));
}

CounterRng::result_type CounterRng::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double CounterRng::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  // Rejection on the largest multiple of bound that fits in 64 bits.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x = (*this)();
  while (x >= limit) x = (*this)();
  return x % bound;
}

}  // namespace corrbound
