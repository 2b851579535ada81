#include "corrbound/dynamics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <utility>

#include "corrbound/errors.hpp"
#include "corrbound/parallel.hpp"
#include "corrbound/rng.hpp"

namespace corrbound {

namespace {

// Writes x - mean(x) into out and returns the squared norm of the result.
double center_into(std::span<const double> x, std::span<double> out) {
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double sq = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    out[l] = x[l] - mean;
    sq += out[l] * out[l];
  }
  return sq;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) s += a[l] * b[l];
  return s;
}

// sqrt(sa * sb) is exact for equal or sign-flipped rows; fall back to the
// split form when the product would leave the normal range.
double normalize(double num, double sa, double sb) {
  const double prod = sa * sb;
  const double denom = (prod >= DBL_MIN && std::isfinite(prod)) ? std::sqrt(prod)
                                                                 : std::sqrt(sa) * std::sqrt(sb);
  return std::clamp(num / denom, -1.0, 1.0);
}

}  // namespace

void SimulationConfig::validate() const {
  if (n < 2) throw Error(ErrorCode::InvalidConfig, "n must be at least 2");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::InvalidConfig, "epsilon must be a positive finite number");
  if (k_max < 1) throw Error(ErrorCode::InvalidConfig, "k_max must be at least 1");
}

std::string_view status_name(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::converged: return "converged";
    case TrajectoryStatus::hit_cap: return "hit_cap";
    case TrajectoryStatus::degenerate_row: return "degenerate_row";
  }
  return "unknown";
}

std::optional<TrajectoryStatus> parse_status(std::string_view text) {
  if (text == "converged") return TrajectoryStatus::converged;
  if (text == "hit_cap") return TrajectoryStatus::hit_cap;
  if (text == "degenerate_row") return TrajectoryStatus::degenerate_row;
  return std::nullopt;
}

double pearson_corr(std::span<const double> x, std::span<const double> y, double norm_floor) {
  if (x.size() != y.size())
    throw Error(ErrorCode::InvalidConfig, "pearson_corr: vectors differ in length");
  std::vector<double> cx(x.size());
  std::vector<double> cy(y.size());
  const double sx = center_into(x, cx);
  if (!(sx >= norm_floor)) throw DegenerateRowError(0);
  const double sy = center_into(y, cy);
  if (!(sy >= norm_floor)) throw DegenerateRowError(1);
  return normalize(dot(cx, cy), sx, sy);
}

SquareMatrix iterate_once(const SquareMatrix& p, double norm_floor) {
  const std::size_t n = p.dim();
  SquareMatrix centered(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = center_into(p.row(i), centered.row(i));
    if (!(sq[i] >= norm_floor)) throw DegenerateRowError(i);
  }

  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = centered.row(i);
    out(i, i) = normalize(dot(ri, ri), sq[i], sq[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = normalize(dot(ri, centered.row(j)), sq[i], sq[j]);
      out(i, j) = c;
      out(j, i) = c;
    }
  }
  return out;
}

SquareMatrix random_initial_matrix(std::size_t n, std::uint64_t seed, std::uint64_t trial_id) {
  auto rng = CounterRng::for_stream(seed, trial_id);
  SquareMatrix p(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = rng.uniform(-1.0, 1.0);
  return p;
}

Trajectory simulate_trajectory(const SimulationConfig& cfg, std::uint64_t trial_id) {
  cfg.validate();
  Trajectory t;
  t.trial_id = trial_id;
  t.n = cfg.n;
  t.status = TrajectoryStatus::hit_cap;

  std::vector<double> deltas;  // deltas[k] = ||P_{k+1} - P_k||_F
  SquareMatrix current = random_initial_matrix(cfg.n, cfg.master_seed, trial_id);
  for (std::size_t k = 1; k <= cfg.k_max; ++k) {
    SquareMatrix next;
    try {
      next = iterate_once(current);
    } catch (const DegenerateRowError&) {
      t.status = TrajectoryStatus::degenerate_row;
      break;
    }
    deltas.push_back(frobenius_distance(next, current));
    const double step_max = max_abs_distance(next, current);
    current = std::move(next);
    if (step_max < cfg.epsilon) {
      t.status = TrajectoryStatus::converged;
      break;
    }
  }

  const double nd = static_cast<double>(cfg.n);
  t.stop_index = deltas.size();
  t.steps.reserve(deltas.size());
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    StepRecord s;
    s.k = k;
    s.delta_raw = deltas[k];
    s.delta_norm = deltas[k] / nd;
    if (k + 1 < deltas.size() && deltas[k] > 0.0) s.rho = deltas[k + 1] / deltas[k];
    t.steps.push_back(s);
  }
  return t;
}

std::vector<RatioPair> post_transient_pairs(const Trajectory& t, std::size_t k_post) {
  if (t.status == TrajectoryStatus::degenerate_row)
    throw Error(ErrorCode::InvalidConfig, "trajectory " + std::to_string(t.trial_id) +
                                              " is degenerate and has no post-transient set");
  std::vector<RatioPair> out;
  // rho is absent on the final record, so scanning all steps covers k <= T-2.
  for (std::size_t k = k_post; k < t.steps.size(); ++k) {
    const StepRecord& s = t.steps[k];
    if (s.rho && *s.rho > 0.0) out.push_back({s.delta_norm, *s.rho});
  }
  return out;
}

std::vector<TrajectoryPairs> collect_pairs(std::span<const Trajectory> trajectories,
                                           std::size_t k_post) {
  std::vector<TrajectoryPairs> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) out.push_back({t.trial_id, post_transient_pairs(t, k_post)});
  return out;
}

std::vector<RatioPair> flatten_pairs(std::span<const TrajectoryPairs> samples) {
  std::vector<RatioPair> out;
  for (const auto& s : samples) out.insert(out.end(), s.pairs.begin(), s.pairs.end());
  return out;
}

SimulationBatch simulate_batch(const SimulationConfig& cfg, std::size_t count, std::size_t jobs,
                               std::uint64_t first_trial) {
  cfg.validate();
  std::vector<Trajectory> all(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    all[i] = simulate_trajectory(cfg, first_trial + i);
  });

  SimulationBatch batch;
  batch.trajectories.reserve(count);
  for (auto& t : all) {
    if (t.status == TrajectoryStatus::degenerate_row)
      batch.discarded_trials.push_back(t.trial_id);
    else
      batch.trajectories.push_back(std::move(t));
  }
  return batch;
}

}  // namespace corrbound
