#include "corrbound/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrbound/errors.hpp"
#include "corrbound/rng.hpp"
#include "corrbound/store.hpp"

namespace corrbound {

namespace {
constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;  // "split"
}

void SplitSpec::validate() const {
  if (!(construction_fraction > 0.0 && construction_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "construction fraction must lie in (0, 1)");
}

IndexSplit split_indices(std::size_t count, const SplitSpec& spec) {
  spec.validate();
  if (count < 2)
    throw Error(ErrorCode::TooFewTrajectories,
                "need at least 2 trajectories to split, got " + std::to_string(count));

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = CounterRng::for_stream(spec.split_seed, kSplitStream);
  for (std::size_t i = count - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  const auto target = static_cast<std::size_t>(
      std::llround(spec.construction_fraction * static_cast<double>(count)));
  const std::size_t n_con = std::clamp<std::size_t>(target, 1, count - 1);

  IndexSplit out;
  out.construction.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_con));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_con), order.end());
  std::sort(out.construction.begin(), out.construction.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

TrajectorySplit split_trajectories(std::span<const Trajectory> trials, const SplitSpec& spec) {
  const IndexSplit idx = split_indices(trials.size(), spec);
  TrajectorySplit out;
  out.construction.reserve(idx.construction.size());
  out.validation.reserve(idx.validation.size());
  for (auto i : idx.construction) out.construction.push_back(trials[i]);
  for (auto i : idx.validation) out.validation.push_back(trials[i]);
  return out;
}

std::string_view weighting_name(Weighting w) {
  return w == Weighting::pooled ? "pooled" : "trajectory_weighted";
}

std::optional<Weighting> parse_weighting(std::string_view text) {
  if (text == "pooled") return Weighting::pooled;
  if (text == "trajectory" || text == "trajectory_weighted") return Weighting::trajectory_weighted;
  return std::nullopt;
}

namespace {

CoverageReport blank_report(const BoundFunction& bound, BoundVariant variant,
                            const EnlargementParams& params, Weighting weighting) {
  params.validate();
  CoverageReport r;
  r.bound_id = bound.provenance().training_hash;
  r.level = bound.level();
  r.variant = variant;
  r.params = params;
  r.weighting = weighting;
  if (bound.provenance().n > 0) r.stratum = bound.provenance().n;
  return r;
}

std::size_t count_covered(const BoundFunction& bound, BoundVariant variant,
                          const EnlargementParams& params, std::span<const RatioPair> pairs) {
  std::size_t covered = 0;
  for (const auto& pr : pairs)
    if (covers(bound, pr, variant, params)) ++covered;
  return covered;
}

}  // namespace

CoverageReport coverage(const BoundFunction& bound, BoundVariant variant,
                        const EnlargementParams& params, std::span<const RatioPair> pairs) {
  CoverageReport r = blank_report(bound, variant, params, Weighting::pooled);
  if (pairs.empty()) throw Error(ErrorCode::EmptyValidationSet, "no validation pairs");
  r.n_pairs = pairs.size();
  r.covered = count_covered(bound, variant, params, pairs);
  r.coverage = static_cast<double>(r.covered) / static_cast<double>(r.n_pairs);
  return r;
}

CoverageReport coverage(const BoundFunction& bound, BoundVariant variant,
                        const EnlargementParams& params,
                        std::span<const TrajectoryPairs> samples, Weighting weighting) {
  CoverageReport r = blank_report(bound, variant, params, weighting);
  double fraction_sum = 0.0;
  for (const auto& s : samples) {
    if (bound.trained_on(s.trial_id))
      throw Error(ErrorCode::OutOfSampleViolation,
                  "trial " + std::to_string(s.trial_id) + " was used to construct the bound");
    if (s.pairs.empty()) continue;
    const std::size_t c = count_covered(bound, variant, params, s.pairs);
    r.covered += c;
    r.n_pairs += s.pairs.size();
    ++r.n_trajectories;
    fraction_sum += static_cast<double>(c) / static_cast<double>(s.pairs.size());
  }
  if (r.n_pairs == 0) throw Error(ErrorCode::EmptyValidationSet, "no validation pairs");
  r.coverage = weighting == Weighting::pooled
                   ? static_cast<double>(r.covered) / static_cast<double>(r.n_pairs)
                   : fraction_sum / static_cast<double>(r.n_trajectories);
  return r;
}

CoverageReport combine_pooled(std::span<const CoverageReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyValidationSet, "no coverage reports to pool");
  CoverageReport out = reports.front();
  out.bound_id = "pooled";
  out.stratum.reset();
  out.n_pairs = 0;
  out.covered = 0;
  out.n_trajectories = 0;
  for (const auto& r : reports) {
    if (r.weighting != Weighting::pooled || r.level != out.level || r.variant != out.variant ||
        r.params.tau != out.params.tau || r.params.lambda != out.params.lambda ||
        r.params.alpha != out.params.alpha)
      throw Error(ErrorCode::InvalidConfig, "pooled reports must share level, variant and params");
    out.n_pairs += r.n_pairs;
    out.covered += r.covered;
    out.n_trajectories += r.n_trajectories;
  }
  if (out.n_pairs == 0) throw Error(ErrorCode::EmptyValidationSet, "no validation pairs");
  out.coverage = static_cast<double>(out.covered) / static_cast<double>(out.n_pairs);
  return out;
}

std::string coverage_csv_header() {
  return "n,p,variant,tau,lambda,alpha,weighting,n_pairs,covered,coverage";
}

std::string coverage_csv_row(const CoverageReport& r) {
  std::string row = r.stratum ? std::to_string(*r.stratum) : std::string("all");
  row += ',' + format_real(r.level);
  row += ',' + std::string(variant_name(r.variant));
  row += ',' + format_real(r.params.tau);
  row += ',' + format_real(r.params.lambda);
  row += ',' + format_real(r.params.alpha);
  row += ',' + std::string(weighting_name(r.weighting));
  row += ',' + std::to_string(r.n_pairs);
  row += ',' + std::to_string(r.covered);
  row += ',' + format_real(r.coverage);
  return row;
}

}  // namespace corrbound
