#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "corrbound/errors.hpp"
#include "corrbound/structural.hpp"

using namespace corrbound;

namespace {

BoundFunction bound_with_values(const std::vector<double>& values) {
  BinPartition part;
  for (std::size_t i = 0; i <= values.size(); ++i) part.edges.push_back(std::pow(10.0, -4.0 + i));
  part.counts.assign(values.size(), 100);
  std::vector<double> lq;
  for (double v : values) lq.push_back(std::log(v));
  BoundProvenance prov;
  prov.n = 12;
  prov.config.p = 0.95;
  return BoundFunction(part, lq, prov);
}

const std::vector<Trajectory>& n10_trials() {
  static const std::vector<Trajectory> trials = [] {
    SimulationConfig cfg;
    cfg.n = 10;
    cfg.master_seed = 21;
    return simulate_batch(cfg, 200).trajectories;
  }();
  return trials;
}

std::vector<double> sorted_valid(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(ExpansionThreshold, HandScan) {
  const auto b = bound_with_values({0.5, 0.9, 1.2, 1.6});
  const auto s = expansion_threshold(b);
  ASSERT_TRUE(s.b_star.has_value());
  EXPECT_EQ(*s.b_star, 3u);
  EXPECT_NEAR(s.envelope_sup, 1.6, 1e-15);
  EXPECT_NEAR(*s.bound_at_threshold, 1.2, 1e-15);
  EXPECT_NEAR(*s.delta_star, std::sqrt(1e-2 * 1e-1), 1e-15);
  EXPECT_EQ(s.bins, 4u);
  EXPECT_EQ(s.n, 12u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_GE(s.envelope_sup, b.bin_value(i));
}

TEST(ExpansionThreshold, NoCrossing) {
  const auto s = expansion_threshold(bound_with_values({0.5, 0.9, 1.0}));
  EXPECT_FALSE(s.b_star.has_value());
  EXPECT_FALSE(s.delta_star.has_value());
  EXPECT_NEAR(s.envelope_sup, 1.0, 1e-15);
  EXPECT_EQ(structural_csv_row(s), "12,0.95,NA,NA,1,NA,3,100");
}

TEST(Bootstrap, IndicesDeterministicAndInRange) {
  const auto a = bootstrap_indices(50, 3, 7);
  EXPECT_EQ(a, bootstrap_indices(50, 3, 7));
  EXPECT_NE(a, bootstrap_indices(50, 3, 8));
  for (auto i : a) EXPECT_LT(i, 50u);
}

TEST(Bootstrap, PercentileEndpointsAreOrderStatistics) {
  const BoundConfig cfg{0.95, 30, 50, 0.005};
  BootstrapConfig boot;
  boot.n_resamples = 1000;
  boot.seed = 11;
  const auto r = bootstrap_structural(n10_trials(), cfg, boot);
  const auto env = sorted_valid(r.envelope_values);
  ASSERT_EQ(env.size(), 1000u - r.n_failed);
  ASSERT_EQ(r.n_failed, 0u);
  EXPECT_EQ(r.envelope_sup.ci_low, env[24]);
  EXPECT_EQ(r.envelope_sup.ci_high, env[974]);
  EXPECT_EQ(r.envelope_sup.median, env[499]);
  const auto ds = sorted_valid(r.delta_star_values);
  const auto k = [&](double a) { return static_cast<std::size_t>(std::ceil(a * ds.size() - 1e-9)) - 1; };
  EXPECT_EQ(r.delta_star.ci_low, ds[k(0.025)]);
  EXPECT_EQ(r.delta_star.ci_high, ds[k(0.975)]);
  EXPECT_LE(r.delta_star.ci_low, r.delta_star.median);
  EXPECT_LE(r.delta_star.median, r.delta_star.ci_high);
  EXPECT_LE(r.envelope_sup.ci_low, r.envelope_sup.median);
  EXPECT_LE(r.envelope_sup.median, r.envelope_sup.ci_high);

  boot.n_resamples = 100;
  const auto a = bootstrap_structural(n10_trials(), cfg, boot, 2, 1);
  const auto b = bootstrap_structural(n10_trials(), cfg, boot, 2, 4);
  EXPECT_EQ(bootstrap_csv_row(a), bootstrap_csv_row(b));
  EXPECT_EQ(a.envelope_values, b.envelope_values);
  boot.seed = 12;
  EXPECT_NE(bootstrap_structural(n10_trials(), cfg, boot).envelope_values, a.envelope_values);
}

TEST(Bootstrap, IdentityResampleReproducesPointEstimate) {
  const BoundConfig cfg{0.95, 30, 50, 0.005};
  BootstrapConfig boot;
  boot.n_resamples = 5;
  boot.identity_resample = true;
  const auto r = bootstrap_structural(n10_trials(), cfg, boot);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.envelope_values[i], r.point.envelope_sup);
    EXPECT_EQ(r.delta_star_values[i], *r.point.delta_star);
  }
  EXPECT_EQ(r.envelope_sup.median, r.envelope_sup.point_estimate);
  EXPECT_EQ(r.delta_star.ci_low, r.delta_star.point_estimate);
}

TEST(Bootstrap, FailedResamplesAreCountedAndExcluded) {
  // c_min equal to roughly the in-range size of the full sample: about half
  // of the resamples come up short.
  const auto samples = collect_pairs(n10_trials(), 2);
  std::vector<double> deltas;
  for (const auto& pr : flatten_pairs(samples)) deltas.push_back(pr.delta);
  const auto part = build_partition(deltas, BoundConfig{0.95, 30, 1, 0.005});
  std::size_t in_range = 0;
  for (auto c : part.counts) in_range += c;
  const BoundConfig cfg{0.95, 30, in_range, 0.005};
  BootstrapConfig boot;
  boot.n_resamples = 200;
  const auto r = bootstrap_structural(n10_trials(), cfg, boot);
  EXPECT_GT(r.n_failed, 0u);
  EXPECT_LT(r.n_failed, 200u);
  EXPECT_EQ(r.envelope_sup.n_valid + r.n_failed, 200u);
}

TEST(Sensitivity, MinCountsMeetRequestedCmin) {
  const std::vector<std::size_t> cmins{20, 50, 100};
  const auto rows = sensitivity_cmin(n10_trials(), BoundConfig{0.95, 30, 200, 0.005}, cmins);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].c_min, cmins[i]);
    EXPECT_GE(rows[i].min_count, cmins[i]);
    EXPECT_EQ(rows[i].n, 10u);
  }
  const std::vector<std::size_t> huge{1000000};
  try {
    sensitivity_cmin(n10_trials(), BoundConfig{}, huge);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(JumpScan, TwoMassSample) {
  std::vector<TrajectoryPairs> samples;
  for (std::uint64_t t = 0; t < 150; ++t) samples.push_back({t, {{0.01, 0.001}}});
  for (std::uint64_t t = 0; t < 10; ++t) samples.push_back({200 + t / 2, {{0.01, 0.3}}});
  const auto grid = parse_level_grid("0.90:0.999:0.0005");
  const auto r = quantile_jump_scan(samples, grid);
  EXPECT_NEAR(r.max_ratio, 300.0, 1e-9);
  EXPECT_EQ(r.tail_count, 10u);
  EXPECT_EQ(r.total, 160u);
  EXPECT_DOUBLE_EQ(r.tail_fraction, 10.0 / 160.0);
  EXPECT_EQ(r.contributing_trajectories, 5u);
  EXPECT_EQ(r.total_trajectories, 155u);
  EXPECT_EQ(r.quantile_before, 0.001);
  EXPECT_EQ(r.quantile_after, 0.3);
  EXPECT_LE(r.p_before, 150.0 / 160.0);
  EXPECT_GT(r.p_at_jump, 150.0 / 160.0);
}

TEST(JumpScan, ConstantSampleAndRange) {
  std::vector<TrajectoryPairs> samples{{0, {{0.1, 0.7}, {0.2, 0.7}, {5.0, 9.0}}}};
  const auto grid = parse_level_grid("0.5:0.99:0.01");
  const auto r = quantile_jump_scan(samples, grid, std::make_pair(0.0, 1.0));
  EXPECT_EQ(r.max_ratio, 1.0);
  EXPECT_EQ(r.tail_count, 0u);
  EXPECT_EQ(r.total, 2u);
  EXPECT_THROW(quantile_jump_scan(samples, grid, std::make_pair(10.0, 20.0)), Error);
}

TEST(LevelGrid, Parsing) {
  const auto g = parse_level_grid("0.90:0.999:0.0005");
  EXPECT_EQ(g.size(), 199u);
  EXPECT_EQ(g.front(), 0.90);
  EXPECT_NEAR(g.back(), 0.999, 1e-12);
  EXPECT_THROW(parse_level_grid("0.9:0.8:0.01"), Error);
  EXPECT_THROW(parse_level_grid("0.9:x:0.01"), Error);
  EXPECT_THROW(parse_level_grid("0.9:0.95"), Error);
}
