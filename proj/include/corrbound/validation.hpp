#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corrbound/bounds.hpp"
#include "corrbound/dynamics.hpp"

namespace corrbound {

struct SplitSpec {
  double construction_fraction = 0.7;
  std::uint64_t split_seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

struct IndexSplit {
  std::vector<std::size_t> construction;  // ascending
  std::vector<std::size_t> validation;    // ascending
};

/// Deterministic Fisher-Yates shuffle of [0, count) keyed by split_seed; the
/// first round(fraction * count) shuffled positions (clamped to
/// [1, count - 1]) form the construction side. Throws TooFewTrajectories
/// when count < 2.
IndexSplit split_indices(std::size_t count, const SplitSpec& spec);

struct TrajectorySplit {
  std::vector<Trajectory> construction;
  std::vector<Trajectory> validation;
};

/// Whole-trajectory split; each side keeps input order.
TrajectorySplit split_trajectories(std::span<const Trajectory> trials, const SplitSpec& spec);

enum class Weighting { pooled, trajectory_weighted };

std::string_view weighting_name(Weighting w);
/// Accepts "pooled", "trajectory" and "trajectory_weighted".
std::optional<Weighting> parse_weighting(std::string_view text);

struct CoverageReport {
  std::string bound_id;  // training hash of the scored bound
  double level = 0.0;
  BoundVariant variant = BoundVariant::q;
  EnlargementParams params;
  std::size_t n_pairs = 0;
  std::size_t covered = 0;
  /// Pooled: covered / n_pairs. Trajectory-weighted: mean of the
  /// per-trajectory fractions.
  double coverage = 0.0;
  std::optional<std::size_t> stratum;  // matrix dimension, if single-n
  Weighting weighting = Weighting::pooled;
  std::size_t n_trajectories = 0;  // trajectories with a non-empty sample
};

/// Pooled coverage of raw pairs. Throws EmptyValidationSet.
CoverageReport coverage(const BoundFunction& bound, BoundVariant variant,
                        const EnlargementParams& params, std::span<const RatioPair> pairs);

/// Coverage of trajectory-tagged samples. Trajectories with no pairs are
/// skipped. Throws OutOfSampleViolation if any trial contributed to the
/// bound, EmptyValidationSet if no pairs remain.
CoverageReport coverage(const BoundFunction& bound, BoundVariant variant,
                        const EnlargementParams& params,
                        std::span<const TrajectoryPairs> samples, Weighting weighting);

/// Global pooled coverage across strata: sums of covered and n_pairs.
/// All reports must be pooled and share level, variant and params.
CoverageReport combine_pooled(std::span<const CoverageReport> reports);

std::string coverage_csv_header();
std::string coverage_csv_row(const CoverageReport& report);

}  // namespace corrbound
