#include "corrbound/store.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "corrbound/errors.hpp"
#include "corrbound/hash.hpp"

namespace corrbound {

using ojson = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_real17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      !std::isfinite(v))
    throw Error(ErrorCode::SchemaMismatch,
                "bad " + std::string(what) + " value '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::SchemaMismatch,
                "bad " + std::string(what) + " value '" + std::string(text) + "'");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed on '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed on '" + path.string() + "'");
}

// --- steps -----------------------------------------------------------------

std::string steps_to_csv(std::span<const Trajectory> trajectories) {
  std::string out(kStepsHeader);
  out += '\n';
  for (const auto& t : trajectories) {
    const std::string prefix = std::to_string(t.n) + ',' + std::to_string(t.trial_id) + ',';
    const std::string suffix =
        ',' + std::to_string(t.stop_index) + ',' + std::string(status_name(t.status)) + '\n';
    for (const auto& s : t.steps) {
      out += prefix;
      out += std::to_string(s.k);
      out += ',' + format_real17(s.delta_raw) + ',';
      if (s.rho) out += format_real17(*s.rho);
      out += ',' + format_real17(s.delta_norm);
      out += suffix;
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

[[noreturn]] void bad_row(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::InvariantViolation,
              "steps line " + std::to_string(line_no) + ": " + why);
}

void check_complete(const Trajectory& t, std::size_t line_no) {
  if (t.steps.size() != t.stop_index)
    bad_row(line_no, "trial " + std::to_string(t.trial_id) + " has " +
                         std::to_string(t.steps.size()) + " rows but stop_index " +
                         std::to_string(t.stop_index));
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    const bool successor = k + 1 < t.steps.size();
    if (s.rho.has_value() != (successor && s.delta_raw > 0.0))
      bad_row(line_no, "trial " + std::to_string(t.trial_id) + " step " + std::to_string(k) +
                           ": rho presence does not match its definition");
  }
}

}  // namespace

std::vector<Trajectory> steps_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kStepsHeader)
    throw Error(ErrorCode::SchemaMismatch,
                "steps header must be '" + std::string(kStepsHeader) + "'");

  std::vector<Trajectory> out;
  std::set<std::pair<std::size_t, std::uint64_t>> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    if (f.size() != 8)
      throw Error(ErrorCode::SchemaMismatch,
                  "steps line " + std::to_string(li + 1) + ": expected 8 fields");
    const auto n = static_cast<std::size_t>(parse_u64(f[0], "n"));
    const std::uint64_t trial = parse_u64(f[1], "trial_id");
    StepRecord s;
    s.k = static_cast<std::size_t>(parse_u64(f[2], "k"));
    s.delta_raw = parse_real(f[3], "delta_raw");
    if (!f[4].empty()) s.rho = parse_real(f[4], "rho");
    s.delta_norm = parse_real(f[5], "delta_norm");
    const auto stop = static_cast<std::size_t>(parse_u64(f[6], "stop_index"));
    const auto status = parse_status(f[7]);
    if (!status)
      throw Error(ErrorCode::SchemaMismatch, "steps line " + std::to_string(li + 1) +
                                                 ": unknown status '" + std::string(f[7]) + "'");

    if (n < 1) bad_row(li + 1, "n must be positive");
    if (s.delta_raw < 0.0) bad_row(li + 1, "delta_raw must be non-negative");
    if (s.rho && *s.rho < 0.0) bad_row(li + 1, "rho must be non-negative");
    if (s.delta_norm != s.delta_raw / static_cast<double>(n))
      bad_row(li + 1, "delta_norm differs from delta_raw / n");

    const bool continues = !out.empty() && out.back().n == n && out.back().trial_id == trial;
    if (!continues) {
      if (!out.empty()) check_complete(out.back(), li);
      if (!seen.emplace(n, trial).second)
        bad_row(li + 1, "rows of trial " + std::to_string(trial) + " are not contiguous");
      Trajectory t;
      t.n = n;
      t.trial_id = trial;
      t.stop_index = stop;
      t.status = *status;
      out.push_back(std::move(t));
    }
    Trajectory& t = out.back();
    if (s.k != t.steps.size()) bad_row(li + 1, "step index out of sequence");
    if (stop != t.stop_index || *status != t.status)
      bad_row(li + 1, "stop_index or status changes within a trajectory");
    t.steps.push_back(s);
  }
  if (!out.empty()) check_complete(out.back(), lines.size());
  return out;
}

void write_steps(const std::filesystem::path& path, std::span<const Trajectory> trajectories) {
  write_text_file(path, steps_to_csv(trajectories));
}

std::vector<Trajectory> read_steps(const std::filesystem::path& path) {
  return steps_from_csv(read_text_file(path));
}

// --- bounds ----------------------------------------------------------------

std::string bound_to_json(const BoundFunction& bound) {
  const auto& prov = bound.provenance();
  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  doc["n"] = prov.n;
  doc["p"] = prov.config.p;
  doc["k_post"] = prov.k_post;
  doc["m"] = prov.config.m;
  doc["c_min"] = prov.config.c_min;
  doc["q_trim"] = prov.config.q_trim;
  doc["edges"] = bound.partition().edges;
  doc["log_quantiles"] = std::vector<double>(bound.log_quantiles().begin(),
                                             bound.log_quantiles().end());
  doc["counts"] = bound.partition().counts;
  doc["training_hash"] = prov.training_hash;
  doc["training_trials"] = prov.training_trials;
  return doc.dump(2) + '\n';
}

namespace {

const ojson& require(const ojson& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end())
    throw Error(ErrorCode::SchemaMismatch, std::string("bound document lacks '") + key + "'");
  return *it;
}

template <typename T>
T require_as(const ojson& doc, const char* key) {
  const ojson& v = require(doc, key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw Error(ErrorCode::SchemaMismatch, "");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) throw Error(ErrorCode::SchemaMismatch, "");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw Error(ErrorCode::SchemaMismatch, "");
    } else {
      if (!v.is_array()) throw Error(ErrorCode::SchemaMismatch, "");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaMismatch, std::string("bound field '") + key + "' has wrong type");
  }
}

}  // namespace

BoundFunction bound_from_json(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("bound is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaMismatch, "bound document must be an object");
  static const std::set<std::string> known = {
      "schema_version", "n",      "p",             "k_post",        "m",
      "c_min",          "q_trim", "edges",         "log_quantiles", "counts",
      "training_hash",  "training_trials"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key))
      throw Error(ErrorCode::SchemaMismatch, "bound document has unknown field '" + key + "'");
  if (require_as<int>(doc, "schema_version") != kSchemaVersion)
    throw Error(ErrorCode::SchemaMismatch, "unsupported bound schema_version");

  BoundProvenance prov;
  prov.n = require_as<std::size_t>(doc, "n");
  prov.k_post = require_as<std::size_t>(doc, "k_post");
  prov.config.p = require_as<double>(doc, "p");
  prov.config.m = require_as<std::size_t>(doc, "m");
  prov.config.c_min = require_as<std::size_t>(doc, "c_min");
  prov.config.q_trim = require_as<double>(doc, "q_trim");
  prov.training_hash = require_as<std::string>(doc, "training_hash");
  prov.training_trials = require_as<std::vector<std::uint64_t>>(doc, "training_trials");
  try {
    prov.config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvariantViolation, e.what());
  }

  BinPartition part;
  part.edges = require_as<std::vector<double>>(doc, "edges");
  part.counts = require_as<std::vector<std::size_t>>(doc, "counts");
  auto log_q = require_as<std::vector<double>>(doc, "log_quantiles");
  return BoundFunction(std::move(part), std::move(log_q), std::move(prov));
}

void write_bound(const std::filesystem::path& path, const BoundFunction& bound) {
  write_text_file(path, bound_to_json(bound));
}

BoundFunction read_bound(const std::filesystem::path& path) {
  return bound_from_json(read_text_file(path));
}

// --- manifests -------------------------------------------------------------

std::string timestamp_utc() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      t = static_cast<std::time_t>(parse_u64(epoch, "SOURCE_DATE_EPOCH"));
    } catch (const Error&) {
    }
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_to_json(const RunManifest& m) {
  ojson doc;
  doc["schema_version"] = m.schema_version;
  doc["command"] = m.command;
  doc["created_at"] = m.created_at;
  doc["settings"] = m.settings;
  doc["inputs"] = m.inputs;
  doc["outputs"] = m.outputs;
  return doc.dump(2) + '\n';
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const ojson doc = ojson::parse(text);
    RunManifest m;
    m.schema_version = doc.at("schema_version").get<int>();
    m.command = doc.at("command").get<std::string>();
    m.created_at = doc.at("created_at").get<std::string>();
    m.settings = doc.at("settings").get<std::map<std::string, std::string>>();
    m.inputs = doc.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = doc.at("outputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("bad manifest: ") + e.what());
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
  return std::filesystem::path(artifact.string() + ".manifest.json");
}

std::string file_hash(const std::filesystem::path& path) {
  return fnv1a64_hex(read_text_file(path));
}

}  // namespace corrbound
