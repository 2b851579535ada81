#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "corrbound/errors.hpp"
#include "corrbound/validation.hpp"

using namespace corrbound;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvariantViolation;
}

// Single-bin bound with value exp(log_q) on [0.1, 1].
BoundFunction flat_bound(double log_q, std::vector<std::uint64_t> trained = {}) {
  BoundProvenance prov;
  prov.config.p = 0.9;
  prov.n = 5;
  prov.training_trials = std::move(trained);
  prov.training_hash = "abc";
  return BoundFunction(BinPartition{{0.1, 1.0}, {10}}, {log_q}, prov);
}

}  // namespace

TEST(Split, SizesAndDisjointness) {
  const auto s = split_indices(10, SplitSpec{0.7, 3});
  EXPECT_EQ(s.construction.size(), 7u);
  EXPECT_EQ(s.validation.size(), 3u);
  std::set<std::size_t> all(s.construction.begin(), s.construction.end());
  for (auto v : s.validation) EXPECT_TRUE(all.insert(v).second);
  EXPECT_EQ(all.size(), 10u);
  EXPECT_TRUE(std::is_sorted(s.construction.begin(), s.construction.end()));
  EXPECT_TRUE(std::is_sorted(s.validation.begin(), s.validation.end()));

  const auto again = split_indices(10, SplitSpec{0.7, 3});
  EXPECT_EQ(s.construction, again.construction);
  bool differs = false;
  for (std::uint64_t seed = 4; seed < 10 && !differs; ++seed)
    differs = split_indices(10, SplitSpec{0.7, seed}).construction != s.construction;
  EXPECT_TRUE(differs);

  EXPECT_EQ(split_indices(1000, SplitSpec{0.7, 1}).construction.size(), 700u);
  EXPECT_EQ(split_indices(2, SplitSpec{0.99, 1}).construction.size(), 1u);
  EXPECT_EQ(split_indices(2, SplitSpec{0.01, 1}).construction.size(), 1u);
  EXPECT_EQ(code_of([] { split_indices(1, SplitSpec{0.7, 1}); }), ErrorCode::TooFewTrajectories);
  EXPECT_EQ(code_of([] { split_indices(10, SplitSpec{1.0, 1}); }), ErrorCode::InvalidConfig);
}

TEST(Split, TrajectoriesKeepInputOrder) {
  std::vector<Trajectory> ts(20);
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i].trial_id = 100 + i;
  const auto s = split_trajectories(ts, SplitSpec{0.7, 9});
  ASSERT_EQ(s.construction.size(), 14u);
  ASSERT_EQ(s.validation.size(), 6u);
  for (std::size_t i = 1; i < s.construction.size(); ++i)
    EXPECT_LT(s.construction[i - 1].trial_id, s.construction[i].trial_id);
  const auto idx = split_indices(20, SplitSpec{0.7, 9});
  for (std::size_t i = 0; i < idx.validation.size(); ++i)
    EXPECT_EQ(s.validation[i].trial_id, 100 + idx.validation[i]);
}

TEST(Coverage, HugeAndTinyBounds) {
  const std::vector<RatioPair> pairs{{0.2, 0.5}, {0.3, 1.5}, {0.5, 0.9}, {0.05, 3.0}};
  const auto hi = coverage(flat_bound(50.0), BoundVariant::q, {}, pairs);
  EXPECT_EQ(hi.coverage, 1.0);
  EXPECT_EQ(hi.n_pairs, 4u);
  const auto lo = coverage(flat_bound(-50.0), BoundVariant::q, {}, pairs);
  EXPECT_EQ(lo.coverage, 0.0);
  EXPECT_EQ(code_of([] { coverage(flat_bound(0.0), BoundVariant::q, {}, std::vector<RatioPair>{}); }),
            ErrorCode::EmptyValidationSet);
}

TEST(Coverage, PooledAndTrajectoryWeightedHandCounts) {
  // Bound value 1. Trial 1: 1 of 1 covered. Trial 2: 1 of 3 covered.
  // Trial 3 has no pairs and is skipped.
  const std::vector<TrajectoryPairs> samples{
      {1, {{0.5, 0.9}}}, {2, {{0.5, 0.8}, {0.5, 1.2}, {0.5, 1.1}}}, {3, {}}};
  const auto bound = flat_bound(0.0, {7, 8});
  const auto pooled = coverage(bound, BoundVariant::q, {}, samples, Weighting::pooled);
  EXPECT_EQ(pooled.covered, 2u);
  EXPECT_EQ(pooled.n_pairs, 4u);
  EXPECT_EQ(pooled.coverage, 0.5);
  EXPECT_EQ(pooled.n_trajectories, 2u);
  EXPECT_EQ(pooled.stratum, std::optional<std::size_t>(5));
  const auto tw = coverage(bound, BoundVariant::q, {}, samples, Weighting::trajectory_weighted);
  EXPECT_DOUBLE_EQ(tw.coverage, (1.0 + 1.0 / 3.0) / 2.0);
  // tol at lambda 0.25, alpha 0.5 with tau 0 lifts the bound to 1.125.
  const auto tol = coverage(bound, BoundVariant::tol, {0.0, 0.25, 0.5}, samples, Weighting::pooled);
  EXPECT_EQ(tol.covered, 3u);
}

TEST(Coverage, RejectsTrainingTrials) {
  const std::vector<TrajectoryPairs> samples{{1, {{0.5, 0.9}}}, {8, {{0.5, 0.9}}}};
  EXPECT_EQ(code_of([&] {
              coverage(flat_bound(0.0, {7, 8}), BoundVariant::q, {}, samples, Weighting::pooled);
            }),
            ErrorCode::OutOfSampleViolation);
  const std::vector<TrajectoryPairs> empty{{1, {}}, {2, {}}};
  EXPECT_EQ(code_of([&] { coverage(flat_bound(0.0), BoundVariant::q, {}, empty, Weighting::pooled); }),
            ErrorCode::EmptyValidationSet);
}

TEST(Coverage, CombinePooledSumsCounts) {
  const std::vector<TrajectoryPairs> a{{1, {{0.5, 0.9}, {0.5, 1.9}}}};
  const std::vector<TrajectoryPairs> b{{2, {{0.5, 0.9}, {0.5, 0.1}, {0.5, 0.2}}}};
  const std::vector<CoverageReport> reps{
      coverage(flat_bound(0.0), BoundVariant::q, {}, a, Weighting::pooled),
      coverage(flat_bound(0.0), BoundVariant::q, {}, b, Weighting::pooled)};
  const auto all = combine_pooled(reps);
  EXPECT_EQ(all.covered, 4u);
  EXPECT_EQ(all.n_pairs, 5u);
  EXPECT_DOUBLE_EQ(all.coverage, 0.8);
  EXPECT_NE(coverage_csv_row(all).find("all,"), std::string::npos);
}

TEST(Coverage, CsvRow) {
  const std::vector<TrajectoryPairs> a{{1, {{0.5, 0.9}, {0.5, 1.9}}}};
  const auto rep = coverage(flat_bound(0.0), BoundVariant::tc, {}, a, Weighting::pooled);
  EXPECT_EQ(coverage_csv_header(), "n,p,variant,tau,lambda,alpha,weighting,n_pairs,covered,coverage");
  EXPECT_EQ(coverage_csv_row(rep), "5,0.9,tc,0.35,0.25,0.9,pooled,2,1,0.5");
  EXPECT_EQ(parse_weighting("trajectory"), Weighting::trajectory_weighted);
  EXPECT_FALSE(parse_weighting("other").has_value());
}

TEST(Coverage, MonotoneInVariantAndPooledIsPairWeighted) {
  SimulationConfig cfg;
  cfg.n = 12;
  cfg.master_seed = 6;
  const auto trials = simulate_batch(cfg, 300).trajectories;
  const auto split = split_trajectories(trials, SplitSpec{0.7, 2});
  const auto bound = build_bound(collect_pairs(split.construction, 2), BoundConfig{0.9, 30, 50, 0.005}, 12, 2);
  const auto held = collect_pairs(split.validation, 2);
  const EnlargementParams par{0.35, 0.25, 0.5};
  const auto q = coverage(bound, BoundVariant::q, par, held, Weighting::pooled);
  const auto tc = coverage(bound, BoundVariant::tc, par, held, Weighting::pooled);
  const auto tol = coverage(bound, BoundVariant::tol, par, held, Weighting::pooled);
  EXPECT_LE(q.covered, tc.covered);
  EXPECT_LE(tc.covered, tol.covered);

  std::size_t weighted_hits = 0, pairs = 0;
  for (const auto& s : held) {
    if (s.pairs.empty()) continue;
    const std::vector<TrajectoryPairs> one{s};
    const auto r = coverage(bound, BoundVariant::q, par, one, Weighting::pooled);
    weighted_hits += static_cast<std::size_t>(std::lround(r.coverage * r.n_pairs));
    pairs += r.n_pairs;
  }
  EXPECT_EQ(pairs, q.n_pairs);
  EXPECT_EQ(weighted_hits, q.covered);
}
