#include "corrbound/structural.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "corrbound/errors.hpp"
#include "corrbound/parallel.hpp"
#include "corrbound/rng.hpp"
#include "corrbound/store.hpp"

namespace corrbound {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kBootstrapDomain = 0x626f6f74ULL;  // "boot"

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }
std::string nan_real(double v) { return std::isnan(v) ? "NA" : format_real(v); }
}  // namespace

double representative_delta(const BoundFunction& bound, std::size_t b) {
  const auto& e = bound.partition().edges;
  return std::sqrt(e.at(b) * e.at(b + 1));
}

StructuralSummary expansion_threshold(const BoundFunction& bound) {
  StructuralSummary s;
  s.n = bound.provenance().n;
  s.p = bound.level();
  s.bins = bound.bin_count();
  s.min_count = bound.partition().min_count();

  const auto lq = bound.log_quantiles();
  s.envelope_sup = std::exp(*std::max_element(lq.begin(), lq.end()));
  for (std::size_t b = 0; b < lq.size(); ++b) {
    if (lq[b] > 0.0) {
      s.b_star = b + 1;
      s.delta_star = representative_delta(bound, b);
      s.bound_at_threshold = std::exp(lq[b]);
      break;
    }
  }
  return s;
}

void BootstrapConfig::validate() const {
  if (n_resamples < 2) throw Error(ErrorCode::InvalidConfig, "need at least 2 resamples");
  if (!(level_low > 0.0 && level_low <= level_high && level_high <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "interval levels must satisfy 0 < low <= high <= 1");
}

std::vector<std::size_t> bootstrap_indices(std::size_t count, std::uint64_t seed,
                                           std::uint64_t resample) {
  auto rng = CounterRng::for_stream(seed ^ kBootstrapDomain, resample);
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(count));
  return idx;
}

namespace {

BootstrapSummary summarize(std::string name, double point, const std::vector<double>& values,
                           const BootstrapConfig& cfg) {
  BootstrapSummary s;
  s.statistic = std::move(name);
  s.point_estimate = point;
  std::vector<double> valid;
  for (double v : values)
    if (!std::isnan(v)) valid.push_back(v);
  s.n_valid = valid.size();
  if (valid.empty()) {
    s.median = s.ci_low = s.ci_high = kNaN;
    return s;
  }
  std::sort(valid.begin(), valid.end());
  s.median = sorted_order_statistic(valid, 0.5);
  s.ci_low = sorted_order_statistic(valid, cfg.level_low);
  s.ci_high = sorted_order_statistic(valid, cfg.level_high);
  return s;
}

}  // namespace

BootstrapResult bootstrap_structural(std::span<const Trajectory> trials,
                                     const BoundConfig& bound_cfg,
                                     const BootstrapConfig& boot_cfg, std::size_t k_post,
                                     std::size_t jobs) {
  bound_cfg.validate();
  boot_cfg.validate();
  if (trials.empty()) throw Error(ErrorCode::InsufficientData, "bootstrap needs trajectories");

  const auto samples = collect_pairs(trials, k_post);
  const std::size_t n = trials.front().n;

  BootstrapResult out;
  out.point = expansion_threshold(build_bound(samples, bound_cfg, n, k_post));
  out.n_resamples = boot_cfg.n_resamples;
  out.delta_star_values.assign(boot_cfg.n_resamples, kNaN);
  out.envelope_values.assign(boot_cfg.n_resamples, kNaN);
  std::vector<char> failed(boot_cfg.n_resamples, 0);

  parallel_for(boot_cfg.n_resamples, jobs, [&](std::size_t r) {
    std::vector<std::size_t> idx;
    if (boot_cfg.identity_resample) {
      idx.resize(samples.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    } else {
      idx = bootstrap_indices(samples.size(), boot_cfg.seed, r);
    }
    std::vector<RatioPair> pairs;
    for (auto i : idx) pairs.insert(pairs.end(), samples[i].pairs.begin(), samples[i].pairs.end());
    try {
      const auto s = expansion_threshold(build_bound(pairs, bound_cfg));
      out.envelope_values[r] = s.envelope_sup;
      if (s.delta_star) out.delta_star_values[r] = *s.delta_star;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::DegenerateRange) throw;
      failed[r] = 1;
    }
  });

  out.n_failed = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  out.delta_star = summarize("delta_star", out.point.delta_star.value_or(kNaN),
                             out.delta_star_values, boot_cfg);
  out.envelope_sup = summarize("envelope_sup", out.point.envelope_sup, out.envelope_values,
                               boot_cfg);
  return out;
}

std::vector<SensitivityRow> sensitivity_cmin(std::span<const Trajectory> trials,
                                             const BoundConfig& bound_cfg,
                                             std::span<const std::size_t> cmin_values,
                                             std::size_t k_post) {
  if (trials.empty()) throw Error(ErrorCode::InsufficientData, "sensitivity needs trajectories");
  const auto samples = collect_pairs(trials, k_post);
  const std::size_t n = trials.front().n;
  std::vector<SensitivityRow> rows;
  for (std::size_t c : cmin_values) {
    BoundConfig cfg = bound_cfg;
    cfg.c_min = c;
    const auto s = expansion_threshold(build_bound(samples, cfg, n, k_post));
    rows.push_back({n, c, s.delta_star, s.envelope_sup, s.min_count, s.bins});
  }
  return rows;
}

JumpReport quantile_jump_scan(std::span<const TrajectoryPairs> samples,
                              std::span<const double> grid,
                              std::optional<std::pair<double, double>> delta_range) {
  if (grid.size() < 2) throw Error(ErrorCode::InvalidConfig, "jump scan needs two grid levels");

  struct Obs {
    double rho;
    std::uint64_t trial;
  };
  std::vector<Obs> obs;
  for (const auto& s : samples)
    for (const auto& pr : s.pairs)
      if (!delta_range || (pr.delta >= delta_range->first && pr.delta <= delta_range->second))
        obs.push_back({pr.rho, s.trial_id});
  if (obs.empty()) throw Error(ErrorCode::EmptySample, "no observations to scan");

  std::vector<double> sorted;
  sorted.reserve(obs.size());
  for (const auto& o : obs) sorted.push_back(o.rho);
  std::sort(sorted.begin(), sorted.end());

  JumpReport r;
  r.total = obs.size();
  for (double level : grid) r.curve.emplace_back(level, sorted_order_statistic(sorted, level));

  std::size_t at = 1;
  r.max_ratio = -1.0;
  for (std::size_t i = 1; i < r.curve.size(); ++i) {
    const double ratio = r.curve[i].second / r.curve[i - 1].second;
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      at = i;
    }
  }
  r.p_before = r.curve[at - 1].first;
  r.p_at_jump = r.curve[at].first;
  r.quantile_before = r.curve[at - 1].second;
  r.quantile_after = r.curve[at].second;

  std::set<std::uint64_t> all_trials;
  std::set<std::uint64_t> tail_trials;
  for (const auto& o : obs) {
    all_trials.insert(o.trial);
    if (o.rho > r.quantile_before) {
      ++r.tail_count;
      tail_trials.insert(o.trial);
    }
  }
  r.tail_fraction = static_cast<double>(r.tail_count) / static_cast<double>(r.total);
  r.contributing_trajectories = tail_trials.size();
  r.total_trajectories = all_trials.size();
  return r;
}

std::vector<double> parse_level_grid(std::string_view text) {
  double parts[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find(':', pos) : text.size();
    if (end == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, "grid must look like lo:hi:step");
    const auto field = text.substr(pos, end - pos);
    const auto res = std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
      throw Error(ErrorCode::InvalidConfig, "bad grid number '" + std::string(field) + "'");
    pos = end + 1;
  }
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || !(lo > 0.0) || !(lo <= hi) || !(hi <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "grid needs 0 < lo <= hi <= 1 and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

std::string structural_csv_header() {
  return "n,p,b_star,delta_star,envelope_sup,bound_at_threshold,bins,min_count";
}

std::string structural_csv_row(const StructuralSummary& s) {
  std::string row = std::to_string(s.n) + ',' + format_real(s.p);
  row += ',' + (s.b_star ? std::to_string(*s.b_star) : std::string("NA"));
  row += ',' + opt_real(s.delta_star);
  row += ',' + format_real(s.envelope_sup);
  row += ',' + opt_real(s.bound_at_threshold);
  row += ',' + std::to_string(s.bins) + ',' + std::to_string(s.min_count);
  return row;
}

std::string bootstrap_csv_header() {
  return "n,p,delta_star_median,delta_star_lo,delta_star_hi,env_median,env_lo,env_hi,"
         "delta_star_point,env_point,bound_at_threshold,resamples,failed";
}

std::string bootstrap_csv_row(const BootstrapResult& r) {
  std::string row = std::to_string(r.point.n) + ',' + format_real(r.point.p);
  for (double v : {r.delta_star.median, r.delta_star.ci_low, r.delta_star.ci_high,
                   r.envelope_sup.median, r.envelope_sup.ci_low, r.envelope_sup.ci_high,
                   r.delta_star.point_estimate, r.envelope_sup.point_estimate})
    row += ',' + nan_real(v);
  row += ',' + opt_real(r.point.bound_at_threshold);
  row += ',' + std::to_string(r.n_resamples) + ',' + std::to_string(r.n_failed);
  return row;
}

std::string sensitivity_csv_header() { return "n,cmin,delta_star,env_sup,min_count"; }

std::string sensitivity_csv_row(const SensitivityRow& r) {
  return std::to_string(r.n) + ',' + std::to_string(r.c_min) + ',' + opt_real(r.delta_star) +
         ',' + format_real(r.envelope_sup) + ',' + std::to_string(r.min_count);
}

std::string jump_csv_header() {
  return "max_ratio,p_before,p_at_jump,quantile_before,quantile_after,tail_count,total,"
         "tail_fraction,contributing_trajectories,total_trajectories";
}

std::string jump_csv_row(const JumpReport& r) {
  return format_real(r.max_ratio) + ',' + format_real(r.p_before) + ',' +
         format_real(r.p_at_jump) + ',' + format_real(r.quantile_before) + ',' +
         format_real(r.quantile_after) + ',' + std::to_string(r.tail_count) + ',' +
         std::to_string(r.total) + ',' + format_real(r.tail_fraction) + ',' +
         std::to_string(r.contributing_trajectories) + ',' +
         std::to_string(r.total_trajectories);
}

}  // namespace corrbound
