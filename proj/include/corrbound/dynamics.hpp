#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "corrbound/matrix.hpp"

namespace corrbound {

/// Squared centered-row norms below this make a correlation undefined.
inline constexpr double kDefaultNormFloor = 1e-300;

struct SimulationConfig {
  std::size_t n = 3;
  double epsilon = 1e-12;     // stopping tolerance on the max-norm step
  std::size_t k_max = 1000;   // iteration cap
  std::size_t k_post = 2;     // first post-transient index
  std::uint64_t master_seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

struct StepRecord {
  std::size_t k = 0;
  double delta_raw = 0.0;      // ||P_{k+1} - P_k||_F
  std::optional<double> rho;   // delta_raw_{k+1} / delta_raw_k
  double delta_norm = 0.0;     // delta_raw / n

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class TrajectoryStatus { converged, hit_cap, degenerate_row };

std::string_view status_name(TrajectoryStatus status);
/// Inverse of status_name; nullopt for unknown text.
std::optional<TrajectoryStatus> parse_status(std::string_view text);

struct Trajectory {
  std::uint64_t trial_id = 0;
  std::size_t n = 0;
  std::size_t stop_index = 0;  // T; equals steps.size()
  std::vector<StepRecord> steps;
  TrajectoryStatus status = TrajectoryStatus::converged;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// A post-transient observation (delta_k, rho_k).
struct RatioPair {
  double delta = 0.0;
  double rho = 0.0;

  friend bool operator==(const RatioPair&, const RatioPair&) = default;
};

/// Pearson correlation of two equal-length vectors, clamped to [-1, 1].
/// Throws DegenerateRowError (row 0 for x, 1 for y) when a centered vector
/// has squared norm below `norm_floor`, InvalidConfig on a length mismatch.
double pearson_corr(std::span<const double> x, std::span<const double> y,
                    double norm_floor = kDefaultNormFloor);

/// One application of the row-row Pearson map. Computes the upper triangle
/// and mirrors it, so the result is exactly symmetric with unit diagonal.
/// Throws DegenerateRowError carrying the offending row index.
SquareMatrix iterate_once(const SquareMatrix& p, double norm_floor = kDefaultNormFloor);

/// P_0 with i.i.d. Uniform[-1, 1) entries from the stream (seed, trial_id).
SquareMatrix random_initial_matrix(std::size_t n, std::uint64_t seed, std::uint64_t trial_id);

/// Iterates from random_initial_matrix until the max-norm step drops below
/// epsilon or k_max iterations have run. A degenerate row ends the run early
/// with status degenerate_row and the steps recorded so far.
Trajectory simulate_trajectory(const SimulationConfig& cfg, std::uint64_t trial_id);

/// Pairs (delta_k, rho_k) for k in {k_post, ..., T-2} with rho_k > 0.
/// Throws InvalidConfig for degenerate trajectories.
std::vector<RatioPair> post_transient_pairs(const Trajectory& t, std::size_t k_post);

/// The post-transient sample of one trajectory, tagged with its trial id.
struct TrajectoryPairs {
  std::uint64_t trial_id = 0;
  std::vector<RatioPair> pairs;
};

/// post_transient_pairs for each trajectory, in input order. Trajectories
/// with an empty post-transient set are kept (with no pairs).
std::vector<TrajectoryPairs> collect_pairs(std::span<const Trajectory> trajectories,
                                           std::size_t k_post);

/// Concatenation of all samples, in order.
std::vector<RatioPair> flatten_pairs(std::span<const TrajectoryPairs> samples);

struct SimulationBatch {
  std::vector<Trajectory> trajectories;         // ordered by trial_id
  std::vector<std::uint64_t> discarded_trials;  // degenerate_row, dropped
};

/// Simulates trial ids [first_trial, first_trial + count) on `jobs` threads.
/// Output is independent of `jobs`. Degenerate trajectories are discarded
/// and listed, never resampled.
SimulationBatch simulate_batch(const SimulationConfig& cfg, std::size_t count,
                               std::size_t jobs = 0, std::uint64_t first_trial = 0);

}  // namespace corrbound
