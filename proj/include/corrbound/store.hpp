#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corrbound/bounds.hpp"
#include "corrbound/dynamics.hpp"

namespace corrbound {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal that parses back to the same double.
std::string format_real(double v);
/// printf("%.17g"); always round-trips a 64-bit double.
std::string format_real17(double v);
/// Whole-string decimal parse. Throws SchemaMismatch naming `what`.
double parse_real(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// --- trajectory step tables -------------------------------------------------

inline constexpr std::string_view kStepsHeader =
    "n,trial_id,k,delta_raw,rho,delta_norm,stop_index,status";

/// One row per step record; reals with 17 significant digits, rho empty when
/// undefined. Trajectories without steps have no rows.
std::string steps_to_csv(std::span<const Trajectory> trajectories);

/// Inverse of steps_to_csv. Rows of a trajectory must be contiguous with
/// k = 0, 1, ...; stop_index and status must agree with the rows; delta_norm
/// must equal delta_raw / n exactly. Throws SchemaMismatch or
/// InvariantViolation.
std::vector<Trajectory> steps_from_csv(std::string_view text);

void write_steps(const std::filesystem::path& path, std::span<const Trajectory> trajectories);
std::vector<Trajectory> read_steps(const std::filesystem::path& path);

// --- bound documents --------------------------------------------------------

std::string bound_to_json(const BoundFunction& bound);
/// Throws SchemaMismatch for malformed or incomplete documents and
/// InvariantViolation for content that breaks BoundFunction's invariants.
BoundFunction bound_from_json(std::string_view text);

void write_bound(const std::filesystem::path& path, const BoundFunction& bound);
BoundFunction read_bound(const std::filesystem::path& path);

// --- run manifests ----------------------------------------------------------

/// Record of one CLI run: what ran, with which settings, on which inputs,
/// producing which outputs (content hashes).
struct RunManifest {
  int schema_version = kSchemaVersion;
  std::string command;
  std::string created_at;  // ISO-8601 UTC
  std::map<std::string, std::string> settings;  // flag name -> value
  std::map<std::string, std::string> inputs;    // path -> content hash
  std::map<std::string, std::string> outputs;   // path -> content hash
};

/// UTC timestamp now, or of SOURCE_DATE_EPOCH when set.
std::string timestamp_utc();

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(std::string_view text);

/// Sidecar location for an artifact: "<path>.manifest.json".
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

/// Content hash of a file on disk (FNV-1a 64, hex).
std::string file_hash(const std::filesystem::path& path);

}  // namespace corrbound
