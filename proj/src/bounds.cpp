#include "corrbound/bounds.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <utility>

#include "corrbound/errors.hpp"
#include "corrbound/hash.hpp"

namespace corrbound {

void BoundConfig::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidConfig, "p must lie in (0, 1)");
  if (m < 1) throw Error(ErrorCode::InvalidConfig, "m must be at least 1");
  if (c_min < 1) throw Error(ErrorCode::InvalidConfig, "c_min must be at least 1");
  if (!(q_trim > 0.0 && q_trim < 0.5))
    throw Error(ErrorCode::InvalidConfig, "q_trim must lie in (0, 0.5)");
}

void EnlargementParams::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw Error(ErrorCode::InvalidConfig, "tau must be a finite non-negative number");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidConfig, "lambda must be a finite non-negative number");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1]");
}

std::string_view variant_name(BoundVariant v) {
  switch (v) {
    case BoundVariant::q: return "q";
    case BoundVariant::tc: return "tc";
    case BoundVariant::tol: return "tol";
  }
  return "unknown";
}

std::optional<BoundVariant> parse_variant(std::string_view text) {
  if (text == "q") return BoundVariant::q;
  if (text == "tc") return BoundVariant::tc;
  if (text == "tol") return BoundVariant::tol;
  return std::nullopt;
}

std::size_t order_statistic_rank(std::size_t size, double level) {
  const double x = level * static_cast<double>(size);
  const double below = std::floor(x);
  double rank = (x - below <= 4.0 * DBL_EPSILON * x) ? below : std::ceil(x);
  rank = std::clamp(rank, 1.0, static_cast<double>(size));
  return static_cast<std::size_t>(rank);
}

double sorted_order_statistic(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw Error(ErrorCode::EmptySample, "quantile of an empty sample");
  if (!(level > 0.0 && level <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "quantile level must lie in (0, 1]");
  return sorted[order_statistic_rank(sorted.size(), level) - 1];
}

double order_statistic_quantile(std::span<const double> sample, double level) {
  if (sample.empty()) throw Error(ErrorCode::EmptySample, "quantile of an empty sample");
  if (!(level > 0.0 && level <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "quantile level must lie in (0, 1]");
  std::vector<double> work(sample.begin(), sample.end());
  const auto nth = work.begin() + static_cast<std::ptrdiff_t>(
                                      order_statistic_rank(work.size(), level) - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

std::vector<double> log_grid(double lo, double hi, std::size_t m) {
  std::vector<double> edges(m + 1);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  edges.front() = lo;
  for (std::size_t j = 1; j < m; ++j)
    edges[j] = std::exp(llo + (lhi - llo) * static_cast<double>(j) / static_cast<double>(m));
  edges.back() = hi;
  return edges;
}

std::size_t locate_bin(std::span<const double> edges, double x) {
  const std::size_t bins = edges.size() - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()) - 1, bins - 1);
}

std::size_t BinPartition::min_count() const {
  return counts.empty() ? 0 : *std::min_element(counts.begin(), counts.end());
}

BinPartition build_partition(std::span<const double> deltas, const BoundConfig& cfg) {
  cfg.validate();
  if (deltas.empty()) throw Error(ErrorCode::InsufficientData, "no delta values to bin");
  std::vector<double> sorted(deltas.begin(), deltas.end());
  for (double d : sorted)
    if (!(d > 0.0) || !std::isfinite(d))
      throw Error(ErrorCode::InvalidConfig, "delta values must be positive and finite");
  std::sort(sorted.begin(), sorted.end());

  const double lo = sorted_order_statistic(sorted, cfg.q_trim);
  const double hi = sorted_order_statistic(sorted, 1.0 - cfg.q_trim);
  if (!(lo < hi))
    throw Error(ErrorCode::DegenerateRange, "trimmed delta range is a single point");

  const std::vector<double> grid = log_grid(lo, hi, cfg.m);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j)
    if (!(grid[j] < grid[j + 1]))
      throw Error(ErrorCode::DegenerateRange, "trimmed delta range too narrow for m bins");

  std::vector<std::size_t> grid_counts(cfg.m, 0);
  std::size_t total = 0;
  for (double d : sorted) {
    if (d < lo || d > hi) continue;
    ++grid_counts[locate_bin(grid, d)];
    ++total;
  }
  if (total < cfg.c_min)
    throw Error(ErrorCode::InsufficientData,
                std::to_string(total) + " in-range observations, c_min is " +
                    std::to_string(cfg.c_min));

  BinPartition out;
  out.edges.push_back(grid.front());
  std::size_t run = 0;
  for (std::size_t j = 0; j < cfg.m; ++j) {
    run += grid_counts[j];
    if (run >= cfg.c_min) {
      out.edges.push_back(grid[j + 1]);
      out.counts.push_back(run);
      run = 0;
    }
  }
  if (run > 0 || out.edges.back() != grid.back()) {
    // Short tail: extend the last merged bin to the top of the range.
    out.edges.back() = grid.back();
    out.counts.back() += run;
  }
  return out;
}

BoundFunction::BoundFunction(BinPartition partition, std::vector<double> log_quantiles,
                             BoundProvenance provenance)
    : partition_(std::move(partition)),
      log_quantiles_(std::move(log_quantiles)),
      provenance_(std::move(provenance)) {
  const auto& e = partition_.edges;
  if (log_quantiles_.empty())
    throw Error(ErrorCode::InvariantViolation, "bound has no bins");
  if (e.size() != log_quantiles_.size() + 1 || partition_.counts.size() != log_quantiles_.size())
    throw Error(ErrorCode::InvariantViolation, "edges, counts and log_quantiles disagree in size");
  if (!(e.front() > 0.0))
    throw Error(ErrorCode::InvariantViolation, "bin edges must be positive");
  for (std::size_t i = 0; i + 1 < e.size(); ++i)
    if (!(e[i] < e[i + 1]) || !std::isfinite(e[i + 1]))
      throw Error(ErrorCode::InvariantViolation, "bin edges must be strictly increasing");
  for (double q : log_quantiles_)
    if (!std::isfinite(q))
      throw Error(ErrorCode::InvariantViolation, "log-quantiles must be finite");
  if (!std::is_sorted(provenance_.training_trials.begin(), provenance_.training_trials.end()) ||
      std::adjacent_find(provenance_.training_trials.begin(),
                         provenance_.training_trials.end()) != provenance_.training_trials.end())
    throw Error(ErrorCode::InvariantViolation, "training trial ids must be sorted and unique");
}

double log_enlargement(BoundVariant variant, const EnlargementParams& params) {
  const double inflation = 0.5 * params.tau * params.tau;
  switch (variant) {
    case BoundVariant::q: return 0.0;
    case BoundVariant::tc: return inflation;
    case BoundVariant::tol: return inflation + std::log1p(params.lambda * (1.0 - params.alpha));
  }
  return 0.0;
}

double BoundFunction::log_bin_value(std::size_t b, BoundVariant variant,
                                    const EnlargementParams& params) const {
  return log_quantiles_.at(b) + log_enlargement(variant, params);
}

double BoundFunction::bin_value(std::size_t b, BoundVariant variant,
                                const EnlargementParams& params) const {
  return std::exp(log_bin_value(b, variant, params));
}

bool BoundFunction::trained_on(std::uint64_t id) const {
  return std::binary_search(provenance_.training_trials.begin(),
                            provenance_.training_trials.end(), id);
}

double evaluate(const BoundFunction& bound, double delta, BoundVariant variant,
                const EnlargementParams& params) {
  return bound.bin_value(bound.bin_of(delta), variant, params);
}

bool covers(const BoundFunction& bound, const RatioPair& pair, BoundVariant variant,
            const EnlargementParams& params) {
  return std::log(pair.rho) <= bound.log_bin_value(bound.bin_of(pair.delta), variant, params);
}

namespace {

BoundFunction build_from_accepted(const std::vector<RatioPair>& accepted, const BoundConfig& cfg,
                                  BoundProvenance provenance, BuildStats* stats) {
  std::vector<double> deltas;
  deltas.reserve(accepted.size());
  for (const auto& pr : accepted) deltas.push_back(pr.delta);
  BinPartition partition = build_partition(deltas, cfg);

  const double lo = partition.edges.front();
  const double hi = partition.edges.back();
  std::vector<std::vector<double>> logs(partition.bin_count());
  std::size_t out_of_range = 0;
  for (const auto& pr : accepted) {
    if (pr.delta < lo || pr.delta > hi) {
      ++out_of_range;
      continue;
    }
    logs[locate_bin(partition.edges, pr.delta)].push_back(std::log(pr.rho));
  }

  std::vector<double> log_quantiles;
  log_quantiles.reserve(logs.size());
  for (std::size_t b = 0; b < logs.size(); ++b) {
    if (logs[b].size() != partition.counts[b])
      throw Error(ErrorCode::InvariantViolation, "bin membership disagrees with partition counts");
    std::sort(logs[b].begin(), logs[b].end());
    log_quantiles.push_back(sorted_order_statistic(logs[b], cfg.p));
  }

  if (stats) stats->out_of_range = out_of_range;
  provenance.config = cfg;
  return BoundFunction(std::move(partition), std::move(log_quantiles), std::move(provenance));
}

std::vector<RatioPair> accept_pairs(std::span<const RatioPair> pairs, BuildStats& stats) {
  std::vector<RatioPair> accepted;
  accepted.reserve(pairs.size());
  for (const auto& pr : pairs) {
    if (pr.delta > 0.0 && pr.rho > 0.0 && std::isfinite(pr.delta) && std::isfinite(pr.rho))
      accepted.push_back(pr);
    else
      ++stats.rejected;
  }
  stats.accepted = accepted.size();
  return accepted;
}

}  // namespace

BoundFunction build_bound(std::span<const RatioPair> pairs, const BoundConfig& cfg,
                          BuildStats* stats) {
  cfg.validate();
  BuildStats local;
  const auto accepted = accept_pairs(pairs, local);
  BoundFunction bound = build_from_accepted(accepted, cfg, BoundProvenance{}, &local);
  if (stats) *stats = local;
  return bound;
}

BoundFunction build_bound(std::span<const TrajectoryPairs> samples, const BoundConfig& cfg,
                          std::size_t n, std::size_t k_post, BuildStats* stats) {
  cfg.validate();
  BoundProvenance prov;
  prov.n = n;
  prov.k_post = k_post;
  prov.training_hash = training_hash(samples);
  for (const auto& s : samples) prov.training_trials.push_back(s.trial_id);
  std::sort(prov.training_trials.begin(), prov.training_trials.end());
  prov.training_trials.erase(std::unique(prov.training_trials.begin(), prov.training_trials.end()),
                             prov.training_trials.end());

  BuildStats local;
  const auto accepted = accept_pairs(flatten_pairs(samples), local);
  BoundFunction bound = build_from_accepted(accepted, cfg, std::move(prov), &local);
  if (stats) *stats = local;
  return bound;
}

std::string training_hash(std::span<const TrajectoryPairs> samples) {
  Fnv1a64 h;
  for (const auto& s : samples) {
    h.update_u64(s.trial_id);
    h.update_u64(s.pairs.size());
    for (const auto& pr : s.pairs) {
      h.update_double(pr.delta);
      h.update_double(pr.rho);
    }
  }
  return h.hex();
}

}  // namespace corrbound
