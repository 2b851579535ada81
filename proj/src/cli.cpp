#include "corrbound/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "corrbound/bounds.hpp"
#include "corrbound/dynamics.hpp"
#include "corrbound/errors.hpp"
#include "corrbound/store.hpp"
#include "corrbound/structural.hpp"
#include "corrbound/validation.hpp"

namespace corrbound {

namespace fs = std::filesystem;

namespace {

// Shared flag targets. Each subcommand binds only the ones it uses.
struct Flags {
  std::size_t jobs = 0;

  // simulate
  std::size_t n = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  double epsilon = 1e-12;
  std::size_t k_max = 1000;
  std::size_t k_post = 2;

  // bound construction
  double p = 0.95;
  std::size_t m = 30;
  std::size_t c_min = 200;
  double q_trim = 0.005;
  std::optional<double> split_fraction;
  double validate_split = 0.7;
  std::uint64_t split_seed = 0;

  // enlargement
  std::vector<std::string> variants{"q"};
  double tau = 0.35;
  double lambda = 0.25;
  std::vector<double> alphas{0.9};
  std::string weighting = "pooled";

  // bootstrap / sensitivity / jump
  std::size_t resamples = 1000;
  double level_low = 0.025;
  double level_high = 0.975;
  std::vector<std::size_t> cmins{50, 200};
  std::string grid = "0.90:0.999:0.0005";
  std::optional<double> delta_lo;
  std::optional<double> delta_hi;

  // paths
  std::string steps;
  std::string bound;
  std::string out;
  std::string curve;
  std::string values;
  std::string in_dir;
};

// Reads TOML-style config files whose top-level keys are the flag names of
// the chosen subcommand, e.g. `n = 30` for `simulate --n 30`.
class FlatConfig : public CLI::ConfigTOML {
 public:
  explicit FlatConfig(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    if (!subcommand_.empty())
      for (auto& item : items)
        if (item.parents.empty()) item.parents = {subcommand_};
    return items;
  }

 private:
  std::string subcommand_;
};

std::string env_name_for(const std::string& long_name) {
  std::string env = "CORRBOUND_";
  for (char c : long_name) env += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return env;
}

void attach_env_names(CLI::App* app) {
  for (CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    opt->envname(env_name_for(opt->get_lnames().front()));
  }
}

std::map<std::string, std::string> collect_settings(const CLI::App* app) {
  std::map<std::string, std::string> settings;
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
    } else {
      value = opt->get_default_str();
    }
    settings[opt->get_lnames().front()] = value;
  }
  return settings;
}

struct RunContext {
  const CLI::App* sub = nullptr;
  std::ostream* err = nullptr;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void emit_manifest(const RunContext& ctx, const fs::path& manifest_file) {
  RunManifest m;
  m.command = ctx.sub->get_name();
  m.created_at = timestamp_utc();
  m.settings = collect_settings(ctx.sub);
  for (const auto& p : ctx.inputs) m.inputs[p] = file_hash(p);
  for (const auto& p : ctx.outputs) m.outputs[p] = file_hash(p);
  write_text_file(manifest_file, manifest_to_json(m));
}

void write_output(RunContext& ctx, const fs::path& path, std::string_view content) {
  write_text_file(path, content);
  ctx.outputs.push_back(path.string());
}

struct Dataset {
  std::vector<Trajectory> trajectories;
  std::size_t n = 0;
};

Dataset load_single_n(RunContext& ctx, const std::string& path) {
  Dataset d;
  d.trajectories = read_steps(path);
  ctx.inputs.push_back(path);
  d.trajectories.erase(std::remove_if(d.trajectories.begin(), d.trajectories.end(),
                                      [](const Trajectory& t) {
                                        return t.status == TrajectoryStatus::degenerate_row;
                                      }),
                       d.trajectories.end());
  if (d.trajectories.empty())
    throw Error(ErrorCode::InsufficientData, "'" + path + "' holds no usable trajectories");
  d.n = d.trajectories.front().n;
  for (const auto& t : d.trajectories)
    if (t.n != d.n)
      throw Error(ErrorCode::InvalidConfig,
                  "'" + path + "' mixes matrix sizes; give one size per steps file");
  return d;
}

std::vector<Trajectory> construction_side(const Flags& f, const std::vector<Trajectory>& all) {
  if (!f.split_fraction) return all;
  return split_trajectories(all, SplitSpec{*f.split_fraction, f.split_seed}).construction;
}

BoundConfig bound_config(const Flags& f) {
  BoundConfig cfg{f.p, f.m, f.c_min, f.q_trim};
  cfg.validate();
  return cfg;
}

std::string csv(const std::string& header, const std::vector<std::string>& rows) {
  std::string out = header + '\n';
  for (const auto& r : rows) out += r + '\n';
  return out;
}

// --- commands ---------------------------------------------------------------

void cmd_simulate(const Flags& f, RunContext& ctx) {
  SimulationConfig cfg{f.n, f.epsilon, f.k_max, f.k_post, f.seed};
  cfg.validate();
  const SimulationBatch batch = simulate_batch(cfg, f.trials, f.jobs);
  for (auto id : batch.discarded_trials)
    *ctx.err << "simulate: discarded degenerate trial " << id << '\n';
  write_output(ctx, f.out, steps_to_csv(batch.trajectories));
  *ctx.err << "simulate: n=" << f.n << " kept " << batch.trajectories.size() << " of "
           << f.trials << " trajectories\n";
  emit_manifest(ctx, manifest_path_for(f.out));
}

void cmd_build(const Flags& f, RunContext& ctx) {
  const BoundConfig cfg = bound_config(f);
  const Dataset d = load_single_n(ctx, f.steps);
  const auto train = construction_side(f, d.trajectories);
  BuildStats stats;
  const auto bound = build_bound(collect_pairs(train, f.k_post), cfg, d.n, f.k_post, &stats);
  write_output(ctx, f.out, bound_to_json(bound));
  *ctx.err << "build: " << bound.bin_count() << " merged bins from " << stats.accepted
           << " pairs (" << stats.out_of_range << " outside trimmed range, " << stats.rejected
           << " rejected)\n";
  emit_manifest(ctx, manifest_path_for(f.out));
}

void cmd_validate(const Flags& f, RunContext& ctx) {
  const BoundFunction bound = read_bound(f.bound);
  ctx.inputs.push_back(f.bound);
  const Dataset d = load_single_n(ctx, f.steps);
  if (bound.provenance().n != 0 && bound.provenance().n != d.n)
    throw Error(ErrorCode::InvalidConfig, "bound was built for n=" +
                                              std::to_string(bound.provenance().n) +
                                              " but steps have n=" + std::to_string(d.n));
  const auto weighting = parse_weighting(f.weighting);
  const auto split = split_trajectories(d.trajectories, SplitSpec{f.validate_split, f.split_seed});
  const auto samples = collect_pairs(split.validation, bound.provenance().k_post);

  std::vector<std::string> rows;
  for (const auto& vname : f.variants) {
    const BoundVariant v = *parse_variant(vname);
    const std::vector<double> alphas =
        v == BoundVariant::tol ? f.alphas : std::vector<double>{f.alphas.front()};
    for (double alpha : alphas) {
      const EnlargementParams params{f.tau, f.lambda, alpha};
      rows.push_back(coverage_csv_row(coverage(bound, v, params, samples, *weighting)));
    }
  }
  write_output(ctx, f.out, csv(coverage_csv_header(), rows));
  emit_manifest(ctx, manifest_path_for(f.out));
}

void cmd_structural(const Flags& f, RunContext& ctx) {
  const BoundFunction bound = read_bound(f.bound);
  ctx.inputs.push_back(f.bound);
  write_output(ctx, f.out,
               csv(structural_csv_header(), {structural_csv_row(expansion_threshold(bound))}));
  emit_manifest(ctx, manifest_path_for(f.out));
}

void cmd_bootstrap(const Flags& f, RunContext& ctx) {
  const BoundConfig cfg = bound_config(f);
  BootstrapConfig boot{f.resamples, f.seed, f.level_low, f.level_high, false};
  boot.validate();
  const Dataset d = load_single_n(ctx, f.steps);
  const auto train = construction_side(f, d.trajectories);
  const BootstrapResult r = bootstrap_structural(train, cfg, boot, f.k_post, f.jobs);
  write_output(ctx, f.out, csv(bootstrap_csv_header(), {bootstrap_csv_row(r)}));
  if (!f.values.empty()) {
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < r.n_resamples; ++i) {
      const double ds = r.delta_star_values[i];
      const double env = r.envelope_values[i];
      rows.push_back(std::to_string(i) + ',' + (std::isnan(ds) ? "NA" : format_real(ds)) + ',' +
                     (std::isnan(env) ? "NA" : format_real(env)));
    }
    write_output(ctx, f.values, csv("resample,delta_star,envelope_sup", rows));
  }
  if (r.n_failed > 0)
    *ctx.err << "bootstrap: " << r.n_failed << " of " << r.n_resamples
             << " resamples failed and were excluded\n";
  emit_manifest(ctx, manifest_path_for(f.out));
}

void cmd_sensitivity(const Flags& f, RunContext& ctx) {
  const BoundConfig cfg = bound_config(f);
  const Dataset d = load_single_n(ctx, f.steps);
  const auto train = construction_side(f, d.trajectories);
  std::vector<std::string> rows;
  for (const auto& row : sensitivity_cmin(train, cfg, f.cmins, f.k_post))
    rows.push_back(sensitivity_csv_row(row));
  write_output(ctx, f.out, csv(sensitivity_csv_header(), rows));
  emit_manifest(ctx, manifest_path_for(f.out));
}

void cmd_diagnose_jump(const Flags& f, RunContext& ctx) {
  const auto grid = parse_level_grid(f.grid);
  const Dataset d = load_single_n(ctx, f.steps);
  std::optional<std::pair<double, double>> range;
  if (f.delta_lo || f.delta_hi)
    range = std::make_pair(f.delta_lo.value_or(0.0),
                           f.delta_hi.value_or(std::numeric_limits<double>::infinity()));
  const JumpReport r = quantile_jump_scan(collect_pairs(d.trajectories, f.k_post), grid, range);
  write_output(ctx, f.out, csv(jump_csv_header(), {jump_csv_row(r)}));
  if (!f.curve.empty()) {
    std::vector<std::string> rows;
    for (const auto& [level, q] : r.curve) rows.push_back(format_real(level) + ',' + format_real(q));
    write_output(ctx, f.curve, csv("p,quantile", rows));
  }
  emit_manifest(ctx, manifest_path_for(f.out));
}

// Plot-ready tables for a directory of steps files and bound documents.
void cmd_report(const Flags& f, RunContext& ctx) {
  if (!fs::is_directory(f.in_dir))
    throw Error(ErrorCode::IoError, "'" + f.in_dir + "' is not a directory");
  fs::create_directories(f.out);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(f.in_dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::map<std::size_t, std::vector<Trajectory>> by_n;
  std::vector<std::pair<std::string, BoundFunction>> bounds;
  for (const auto& path : files) {
    const std::string name = path.filename().string();
    if (name.ends_with(".manifest.json")) continue;
    if (path.extension() == ".csv") {
      const std::string text = read_text_file(path);
      if (!text.starts_with(kStepsHeader)) continue;
      ctx.inputs.push_back(path.string());
      for (auto& t : steps_from_csv(text))
        if (t.status != TrajectoryStatus::degenerate_row) by_n[t.n].push_back(std::move(t));
    } else if (path.extension() == ".json") {
      ctx.inputs.push_back(path.string());
      bounds.emplace_back(name, read_bound(path));
    }
  }
  if (by_n.empty() && bounds.empty())
    throw Error(ErrorCode::InsufficientData, "no steps tables or bounds in '" + f.in_dir + "'");

  const fs::path out_dir(f.out);
  const EnlargementParams base{f.tau, f.lambda, 0.9};
  const std::vector<double> levels{0.80, 0.90, 0.95, 0.99};
  const std::vector<std::pair<BoundVariant, double>> variants{
      {BoundVariant::q, 0.9}, {BoundVariant::tc, 0.9}, {BoundVariant::tol, 0.9},
      {BoundVariant::tol, 0.5}};

  // Scatter of (delta, rho) and binwise median / IQR.
  std::vector<std::string> scatter, profile;
  // Coverage vs p, per n and pooled across n.
  std::vector<std::string> coverage_rows;
  std::map<std::pair<double, std::size_t>, std::vector<CoverageReport>> pooled;
  // delta* and envelope vs n.
  std::vector<std::string> structural_rows;

  for (const auto& [n, trajs] : by_n) {
    const auto samples = collect_pairs(trajs, f.k_post);
    for (std::size_t t = 0; t < trajs.size(); ++t)
      for (std::size_t k = f.k_post, i = 0; k < trajs[t].steps.size(); ++k) {
        const auto& s = trajs[t].steps[k];
        if (!s.rho || *s.rho <= 0.0) continue;
        const auto& pr = samples[t].pairs[i++];
        scatter.push_back(std::to_string(n) + ',' + std::to_string(trajs[t].trial_id) + ',' +
                          std::to_string(k) + ',' + format_real(pr.delta) + ',' +
                          format_real(pr.rho));
      }

    const auto flat = flatten_pairs(samples);
    std::vector<double> deltas;
    for (const auto& pr : flat) deltas.push_back(pr.delta);
    const BinPartition grid = build_partition(deltas, BoundConfig{0.5, f.m, 1, f.q_trim});
    std::vector<std::vector<double>> rhos(grid.bin_count());
    for (const auto& pr : flat)
      if (pr.delta >= grid.edges.front() && pr.delta <= grid.edges.back())
        rhos[locate_bin(grid.edges, pr.delta)].push_back(pr.rho);
    for (std::size_t b = 0; b < rhos.size(); ++b) {
      std::sort(rhos[b].begin(), rhos[b].end());
      profile.push_back(std::to_string(n) + ',' + std::to_string(b + 1) + ',' +
                        format_real(grid.edges[b]) + ',' + format_real(grid.edges[b + 1]) + ',' +
                        format_real(std::sqrt(grid.edges[b] * grid.edges[b + 1])) + ',' +
                        std::to_string(rhos[b].size()) + ',' +
                        format_real(sorted_order_statistic(rhos[b], 0.25)) + ',' +
                        format_real(sorted_order_statistic(rhos[b], 0.5)) + ',' +
                        format_real(sorted_order_statistic(rhos[b], 0.75)));
    }

    const auto split = split_trajectories(trajs, SplitSpec{f.validate_split, f.split_seed});
    const auto train = collect_pairs(split.construction, f.k_post);
    const auto held_out = collect_pairs(split.validation, f.k_post);
    for (double p : levels) {
      BoundConfig cfg{p, f.m, f.c_min, f.q_trim};
      const auto bound = build_bound(train, cfg, n, f.k_post);
      for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const auto [v, alpha] = variants[vi];
        const EnlargementParams params{f.tau, f.lambda, alpha};
        const auto rep = coverage(bound, v, params, held_out, Weighting::pooled);
        coverage_rows.push_back(coverage_csv_row(rep));
        pooled[{p, vi}].push_back(rep);
      }
      if (p == 0.95) structural_rows.push_back(structural_csv_row(expansion_threshold(bound)));
    }
  }
  if (by_n.size() > 1)
    for (const auto& [key, reps] : pooled) coverage_rows.push_back(coverage_csv_row(combine_pooled(reps)));

  // Bound sandwich for every bound document found.
  std::vector<std::string> sandwich;
  for (const auto& [name, bound] : bounds)
    for (std::size_t b = 0; b < bound.bin_count(); ++b) {
      const auto& e = bound.partition().edges;
      sandwich.push_back(
          name + ',' + std::to_string(bound.provenance().n) + ',' + format_real(bound.level()) +
          ',' + std::to_string(b + 1) + ',' + format_real(e[b]) + ',' + format_real(e[b + 1]) +
          ',' + format_real(bound.bin_value(b, BoundVariant::q, base)) + ',' +
          format_real(bound.bin_value(b, BoundVariant::tc, base)) + ',' +
          format_real(bound.bin_value(b, BoundVariant::tol, {f.tau, f.lambda, 0.9})) + ',' +
          format_real(bound.bin_value(b, BoundVariant::tol, {f.tau, f.lambda, 0.5})));
    }

  write_output(ctx, out_dir / "ratio_vs_delta.csv", csv("n,trial_id,k,delta,rho", scatter));
  write_output(ctx, out_dir / "binwise_profile.csv",
               csv("n,bin,delta_lo,delta_hi,delta_mid,count,rho_q25,rho_median,rho_q75", profile));
  write_output(ctx, out_dir / "bound_sandwich.csv",
               csv("source,n,p,bin,delta_lo,delta_hi,q,tc,tol_alpha_0.9,tol_alpha_0.5", sandwich));
  write_output(ctx, out_dir / "coverage_vs_p.csv", csv(coverage_csv_header(), coverage_rows));
  write_output(ctx, out_dir / "structural_vs_n.csv", csv(structural_csv_header(), structural_rows));
  emit_manifest(ctx, out_dir / "report.manifest.json");
}

std::string error_line(std::string_view code, std::string_view message) {
  nlohmann::json j;
  j["error"] = code;
  j["message"] = message;
  return j.dump();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Iterated Pearson correlation dynamics: simulation, contraction-ratio bounds, "
               "coverage and structural summaries"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML-style config file with the same key names as the flags")
      ->envname("CORRBOUND_CONFIG");

  const auto positive = CLI::PositiveNumber;
  const auto unit_open = CLI::Range(0.0, 1.0);

  auto add_bound_flags = [&](CLI::App* s, bool with_cmin) {
    s->add_option("--p", f.p, "Quantile level")->capture_default_str()->check(unit_open);
    s->add_option("--m", f.m, "Initial log-bin count")->capture_default_str()->check(positive);
    if (with_cmin)
      s->add_option("--cmin", f.c_min, "Minimum merged-bin count")->capture_default_str()->check(positive);
    s->add_option("--qtrim", f.q_trim, "Trimming quantile")->capture_default_str()->check(CLI::Range(0.0, 0.5));
    s->add_option("--kpost", f.k_post, "First post-transient index")->capture_default_str();
  };
  auto add_split_flags = [&](CLI::App* s) {
    s->add_option("--split", f.split_fraction, "Use only the construction side of this split")
        ->check(unit_open);
    s->add_option("--split-seed", f.split_seed, "Split shuffle seed")->capture_default_str();
  };

  auto* sim = app.add_subcommand("simulate", "Simulate trajectories into a steps table");
  sim->add_option("--n", f.n, "Matrix dimension")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  sim->add_option("--trials", f.trials, "Number of trajectories")->required();
  sim->add_option("--seed", f.seed, "Master seed")->required();
  sim->add_option("--epsilon", f.epsilon, "Max-norm stopping tolerance")->capture_default_str()->check(positive);
  sim->add_option("--kmax", f.k_max, "Iteration cap")->capture_default_str()->check(positive);
  sim->add_option("--kpost", f.k_post, "First post-transient index")->capture_default_str();
  sim->add_option("--out", f.out, "Output steps CSV")->required();

  auto* build = app.add_subcommand("build", "Construct a conditional quantile bound");
  build->add_option("--steps", f.steps, "Input steps CSV")->required();
  add_bound_flags(build, true);
  add_split_flags(build);
  build->add_option("--out", f.out, "Output bound JSON")->required();

  auto* val = app.add_subcommand("validate", "Out-of-sample coverage of a bound");
  val->add_option("--bound", f.bound, "Bound JSON")->required();
  val->add_option("--steps", f.steps, "Steps CSV")->required();
  val->add_option("--split", f.validate_split, "Construction fraction")->capture_default_str()->check(unit_open);
  val->add_option("--split-seed", f.split_seed, "Split shuffle seed")->capture_default_str();
  val->add_option("--variant", f.variants, "q, tc, tol (comma list)")
      ->delimiter(',')->capture_default_str()->check(CLI::IsMember({"q", "tc", "tol"}));
  val->add_option("--tau", f.tau, "Log-scale inflation")->capture_default_str()->check(CLI::NonNegativeNumber);
  val->add_option("--lambda", f.lambda, "Dilation magnitude")->capture_default_str()->check(CLI::NonNegativeNumber);
  val->add_option("--alpha", f.alphas, "Dilation attenuation (comma list)")
      ->delimiter(',')->capture_default_str()->check(CLI::Range(0.0, 1.0));
  val->add_option("--weighting", f.weighting, "pooled or trajectory")
      ->capture_default_str()->check(CLI::IsMember({"pooled", "trajectory", "trajectory_weighted"}));
  val->add_option("--out", f.out, "Output coverage CSV")->required();

  auto* st = app.add_subcommand("structural", "Expansion threshold and envelope of a bound");
  st->add_option("--bound", f.bound, "Bound JSON")->required();
  st->add_option("--out", f.out, "Output summary CSV")->required();

  auto* boot = app.add_subcommand("bootstrap", "Trajectory bootstrap of structural summaries");
  boot->add_option("--steps", f.steps, "Steps CSV")->required();
  add_bound_flags(boot, true);
  add_split_flags(boot);
  boot->add_option("--resamples", f.resamples, "Bootstrap resamples")->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
  boot->add_option("--seed", f.seed, "Bootstrap seed")->required();
  boot->add_option("--ci-low", f.level_low, "Lower interval level")->capture_default_str()->check(unit_open);
  boot->add_option("--ci-high", f.level_high, "Upper interval level")->capture_default_str()->check(unit_open);
  boot->add_option("--values", f.values, "Optional per-resample CSV");
  boot->add_option("--out", f.out, "Output bootstrap CSV")->required();

  auto* sens = app.add_subcommand("sensitivity", "Structural summaries across c_min values");
  sens->add_option("--steps", f.steps, "Steps CSV")->required();
  add_bound_flags(sens, false);
  add_split_flags(sens);
  sens->add_option("--cmin", f.cmins, "c_min values (comma list)")
      ->delimiter(',')->capture_default_str()->check(positive);
  sens->add_option("--out", f.out, "Output sensitivity CSV")->required();

  auto* jump = app.add_subcommand("diagnose-jump", "Largest jump of the rho quantile function");
  jump->add_option("--steps", f.steps, "Steps CSV")->required();
  jump->add_option("--grid", f.grid, "Levels lo:hi:step")->capture_default_str();
  jump->add_option("--kpost", f.k_post, "First post-transient index")->capture_default_str();
  jump->add_option("--delta-lo", f.delta_lo, "Restrict to delta >= this");
  jump->add_option("--delta-hi", f.delta_hi, "Restrict to delta <= this");
  jump->add_option("--curve", f.curve, "Optional quantile-curve CSV");
  jump->add_option("--out", f.out, "Output jump CSV")->required();

  auto* rep = app.add_subcommand("report", "Plot-ready tables from a directory of artifacts");
  rep->add_option("--in", f.in_dir, "Input directory")->required();
  rep->add_option("--out", f.out, "Output directory")->required();
  rep->add_option("--m", f.m, "Initial log-bin count")->capture_default_str()->check(positive);
  rep->add_option("--cmin", f.c_min, "Minimum merged-bin count")->capture_default_str()->check(positive);
  rep->add_option("--qtrim", f.q_trim, "Trimming quantile")->capture_default_str()->check(CLI::Range(0.0, 0.5));
  rep->add_option("--kpost", f.k_post, "First post-transient index")->capture_default_str();
  rep->add_option("--split", f.validate_split, "Construction fraction")->capture_default_str()->check(unit_open);
  rep->add_option("--split-seed", f.split_seed, "Split shuffle seed")->capture_default_str();
  rep->add_option("--tau", f.tau, "Log-scale inflation")->capture_default_str()->check(CLI::NonNegativeNumber);
  rep->add_option("--lambda", f.lambda, "Dilation magnitude")->capture_default_str()->check(CLI::NonNegativeNumber);

  std::string chosen;
  for (const auto& a : args)
    if (std::ranges::any_of(app.get_subcommands({}), [&](CLI::App* s) {
          return s->get_name() == a;
        })) {
      chosen = a;
      break;
    }
  app.config_formatter(std::make_shared<FlatConfig>(chosen));

  for (CLI::App* s : app.get_subcommands({})) {
    s->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    attach_env_names(s);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_line("FlagError", e.what()) << '\n';
    return kExitFlagError;
  }

  RunContext ctx;
  ctx.err = &err;
  try {
    const std::pair<CLI::App*, void (*)(const Flags&, RunContext&)> table[] = {
        {sim, cmd_simulate},       {build, cmd_build},         {val, cmd_validate},
        {st, cmd_structural},      {boot, cmd_bootstrap},      {sens, cmd_sensitivity},
        {jump, cmd_diagnose_jump}, {rep, cmd_report}};
    for (const auto& [sub, fn] : table) {
      if (!sub->parsed()) continue;
      ctx.sub = sub;
      if (sub->get_help_ptr() && sub->get_help_ptr()->count()) return kExitOk;
      fn(f, ctx);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << error_line(error_code_name(e.code()), e.what()) << '\n';
    return e.code() == ErrorCode::InvalidConfig && ctx.inputs.empty() ? kExitFlagError
                                                                      : kExitDataError;
  } catch (const std::exception& e) {
    err << error_line("InternalError", e.what()) << '\n';
    return kExitDataError;
  }
  return kExitFlagError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace corrbound
