#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corrbound/dynamics.hpp"

namespace corrbound {

struct BoundConfig {
  double p = 0.95;          // quantile level
  std::size_t m = 30;       // initial log-bin count
  std::size_t c_min = 200;  // minimum observations per merged bin
  double q_trim = 0.005;    // trimming quantile for the delta range

  /// Throws InvalidConfig.
  void validate() const;

  friend bool operator==(const BoundConfig&, const BoundConfig&) = default;
};

struct EnlargementParams {
  double tau = 0.35;     // log-scale inflation
  double lambda = 0.25;  // dilation magnitude
  double alpha = 0.9;    // dilation attenuation

  /// Throws InvalidConfig.
  void validate() const;
};

enum class BoundVariant { q, tc, tol };

std::string_view variant_name(BoundVariant v);
std::optional<BoundVariant> parse_variant(std::string_view text);

/// 1-based rank ceil(level * size), clamped to [1, size]. Products within a
/// few ulps of an integer are treated as that integer, so that e.g.
/// level = 0.7, size = 10 selects rank 7 rather than 8.
std::size_t order_statistic_rank(std::size_t size, double level);

/// The order_statistic_rank-th smallest element. Throws EmptySample, and
/// InvalidConfig when level is outside (0, 1].
double order_statistic_quantile(std::span<const double> sample, double level);

/// Same rule on data already sorted ascending.
double sorted_order_statistic(std::span<const double> sorted, double level);

/// m + 1 logarithmically equispaced edges from lo to hi; the end points are
/// exactly lo and hi.
std::vector<double> log_grid(double lo, double hi, std::size_t m);

/// Index b with edges[b] <= x < edges[b + 1]; the last bin is closed and x
/// outside [edges.front(), edges.back()] clamps to the nearest end bin.
std::size_t locate_bin(std::span<const double> edges, double x);

/// Merged partition of the trimmed delta range.
struct BinPartition {
  std::vector<double> edges;         // M + 1 strictly increasing raw edges
  std::vector<std::size_t> counts;   // M in-range counts

  std::size_t bin_count() const noexcept { return counts.size(); }
  std::size_t min_count() const;

  friend bool operator==(const BinPartition&, const BinPartition&) = default;
};

/// Trimmed range, log grid, then left-to-right merging until each merged
/// bin holds at least c_min points. A final run short of c_min is folded
/// into the previous merged bin. Values outside the trimmed range are not
/// counted. Throws DegenerateRange, InsufficientData, InvalidConfig.
BinPartition build_partition(std::span<const double> deltas, const BoundConfig& cfg);

/// Where a bound came from: its configuration and the training data.
struct BoundProvenance {
  BoundConfig config;
  std::size_t n = 0;       // matrix dimension; 0 when unknown
  std::size_t k_post = 2;
  std::string training_hash;                  // fingerprint of training pairs
  std::vector<std::uint64_t> training_trials; // sorted, unique

  friend bool operator==(const BoundProvenance&, const BoundProvenance&) = default;
};

/// Piecewise-constant bound exp(q_b) over a merged partition, plus the
/// deterministic enlargements. Immutable after construction.
class BoundFunction {
 public:
  /// Throws InvariantViolation unless edges are strictly increasing and
  /// positive, sizes agree, and every log-quantile is finite.
  BoundFunction(BinPartition partition, std::vector<double> log_quantiles,
                BoundProvenance provenance);

  const BinPartition& partition() const noexcept { return partition_; }
  std::span<const double> log_quantiles() const noexcept { return log_quantiles_; }
  const BoundProvenance& provenance() const noexcept { return provenance_; }
  double level() const noexcept { return provenance_.config.p; }
  std::size_t bin_count() const noexcept { return log_quantiles_.size(); }

  std::size_t bin_of(double delta) const { return locate_bin(partition_.edges, delta); }

  /// log B(delta) for bin b.
  double log_bin_value(std::size_t b, BoundVariant variant = BoundVariant::q,
                       const EnlargementParams& params = {}) const;
  double bin_value(std::size_t b, BoundVariant variant = BoundVariant::q,
                   const EnlargementParams& params = {}) const;

  /// True when training trial `id` contributed to this bound.
  bool trained_on(std::uint64_t id) const;

  friend bool operator==(const BoundFunction&, const BoundFunction&) = default;

 private:
  BinPartition partition_;
  std::vector<double> log_quantiles_;
  BoundProvenance provenance_;
};

/// Additive log-scale shift of a variant: 0, tau^2/2, tau^2/2 + log(1 + lambda(1 - alpha)).
double log_enlargement(BoundVariant variant, const EnlargementParams& params);

/// B(delta) for the chosen variant. Total on delta > 0 (clamped at the ends).
double evaluate(const BoundFunction& bound, double delta,
                BoundVariant variant = BoundVariant::q, const EnlargementParams& params = {});

/// rho <= B(delta), compared on the log scale where the bound is stored, so
/// that the order statistic itself is always covered.
bool covers(const BoundFunction& bound, const RatioPair& pair,
            BoundVariant variant = BoundVariant::q, const EnlargementParams& params = {});

struct BuildStats {
  std::size_t accepted = 0;      // pairs with delta > 0 and rho > 0
  std::size_t rejected = 0;      // non-positive or non-finite pairs
  std::size_t out_of_range = 0;  // accepted but outside the trimmed range
};

/// Binwise order-statistic quantiles of log rho. Provenance is left with
/// n = 0 and no training ids.
BoundFunction build_bound(std::span<const RatioPair> pairs, const BoundConfig& cfg,
                          BuildStats* stats = nullptr);

/// As above, training on every pair of `samples`; records n, k_post, the
/// training trial ids and a content hash in the provenance.
BoundFunction build_bound(std::span<const TrajectoryPairs> samples, const BoundConfig& cfg,
                          std::size_t n, std::size_t k_post, BuildStats* stats = nullptr);

/// Fingerprint of a training sample (trial ids and pair bit patterns).
std::string training_hash(std::span<const TrajectoryPairs> samples);

}  // namespace corrbound
