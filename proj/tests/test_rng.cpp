#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "corrbound/rng.hpp"

using corrbound::CounterRng;

TEST(Rng, MatchesReferenceSplitMix64Sequence) {
  // Published SplitMix64 outputs for state 0.
  CounterRng rng(0);
  EXPECT_EQ(rng(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng(), 0x06c45d188009454fULL);
  EXPECT_EQ(rng.counter(), 3u);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  auto a = CounterRng::for_stream(42, 7);
  auto b = CounterRng::for_stream(42, 7);
  auto c = CounterRng::for_stream(42, 8);
  auto d = CounterRng::for_stream(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
}

TEST(Rng, UniformStaysInRangeWithExpectedMoments) {
  auto rng = CounterRng::for_stream(1, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(-1.0, 1.0);
    ASSERT_GE(u, -1.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sumsq += u * u;
  }
  // Mean 0 and variance 1/3 for U[-1, 1]; 6 standard errors.
  EXPECT_NEAR(sum / n, 0.0, 6.0 * std::sqrt(1.0 / 3.0 / n));
  EXPECT_NEAR(sumsq / n, 1.0 / 3.0, 6.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST(Rng, BelowIsInRangeAndCoversAllValues) {
  auto rng = CounterRng::for_stream(5, 3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 600);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Rng, Mix64IsInjectiveOnSmallDomain) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(corrbound::mix64(i));
  EXPECT_EQ(seen.size(), 10000u);
}
