#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corrbound/bounds.hpp"
#include "corrbound/dynamics.hpp"

namespace corrbound {

struct StructuralSummary {
  std::size_t n = 0;
  double p = 0.0;
  std::optional<std::size_t> b_star;         // 1-based first bin with B > 1
  std::optional<double> delta_star;          // representative delta of b_star
  double envelope_sup = 0.0;                 // max over bins of B^q
  std::optional<double> bound_at_threshold;  // B^q on bin b_star
  std::size_t bins = 0;
  std::size_t min_count = 0;
};

/// Geometric mean of the edges of merged bin b (0-based).
double representative_delta(const BoundFunction& bound, std::size_t b);

/// First-crossing scan in increasing delta. A bin crosses when its log-quantile
/// is positive, i.e. exp(q_b) > 1.
StructuralSummary expansion_threshold(const BoundFunction& bound);

struct BootstrapConfig {
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 1;
  double level_low = 0.025;
  double level_high = 0.975;
  /// Test hook: every resample is the original index set 0..N-1.
  bool identity_resample = false;

  /// Throws InvalidConfig.
  void validate() const;
};

struct BootstrapSummary {
  std::string statistic;
  double point_estimate = 0.0;  // NaN when undefined on the original data
  double median = 0.0;          // NaN when no resample produced a value
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_valid = 0;
};

struct BootstrapResult {
  StructuralSummary point;
  BootstrapSummary delta_star;
  BootstrapSummary envelope_sup;
  std::size_t n_resamples = 0;
  std::size_t n_failed = 0;  // resamples whose bound could not be rebuilt
  // Per-resample statistics in resample order; NaN marks a failed build
  // (or, for delta_star, a resample with no crossing).
  std::vector<double> delta_star_values;
  std::vector<double> envelope_values;
};

/// Trajectory-level percentile bootstrap of delta_star and envelope_sup.
/// Resample r draws N trajectory indices with replacement from the stream
/// (seed, r). Interval ends and the median are type-1 order statistics of
/// the valid resampled values. Failed rebuilds (InsufficientData,
/// DegenerateRange) are counted and excluded. Results do not depend on jobs.
BootstrapResult bootstrap_structural(std::span<const Trajectory> trials,
                                     const BoundConfig& bound_cfg,
                                     const BootstrapConfig& boot_cfg,
                                     std::size_t k_post = 2, std::size_t jobs = 0);

/// Draw `count` indices with replacement from the stream (seed, resample).
std::vector<std::size_t> bootstrap_indices(std::size_t count, std::uint64_t seed,
                                           std::uint64_t resample);

struct SensitivityRow {
  std::size_t n = 0;
  std::size_t c_min = 0;
  std::optional<double> delta_star;
  double envelope_sup = 0.0;
  std::size_t min_count = 0;
  std::size_t bins = 0;
};

/// Rebuilds the bound for each c_min and summarises it. Errors propagate.
std::vector<SensitivityRow> sensitivity_cmin(std::span<const Trajectory> trials,
                                             const BoundConfig& bound_cfg,
                                             std::span<const std::size_t> cmin_values,
                                             std::size_t k_post = 2);

struct JumpReport {
  double max_ratio = 1.0;
  double p_before = 0.0;   // grid level below the jump
  double p_at_jump = 0.0;  // grid level where the larger quantile appears
  double quantile_before = 0.0;
  double quantile_after = 0.0;
  std::size_t tail_count = 0;  // observations strictly above quantile_before
  std::size_t total = 0;
  double tail_fraction = 0.0;
  std::size_t contributing_trajectories = 0;  // distinct trials in the tail
  std::size_t total_trajectories = 0;         // distinct trials in the sample
  std::vector<std::pair<double, double>> curve;  // (level, quantile of rho)
};

/// Largest ratio between type-1 quantiles of rho at consecutive grid levels.
/// With `delta_range` set, only pairs with delta in [lo, hi] are scanned;
/// otherwise the pooled sample is used. Throws EmptySample, and InvalidConfig
/// for a grid with fewer than two levels.
JumpReport quantile_jump_scan(std::span<const TrajectoryPairs> samples,
                              std::span<const double> grid,
                              std::optional<std::pair<double, double>> delta_range = std::nullopt);

/// "lo:hi:step" -> lo, lo + step, ... up to hi (inclusive within 1e-9 step).
std::vector<double> parse_level_grid(std::string_view text);

std::string structural_csv_header();
std::string structural_csv_row(const StructuralSummary& s);
std::string bootstrap_csv_header();
std::string bootstrap_csv_row(const BootstrapResult& r);
std::string sensitivity_csv_header();
std::string sensitivity_csv_row(const SensitivityRow& r);
std::string jump_csv_header();
std::string jump_csv_row(const JumpReport& r);

}  // namespace corrbound
