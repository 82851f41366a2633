#pragma once

// Command-line front end. Thin argument plumbing around the library stages.
// Every stage reads files and writes files (the CSVs are the inter-stage
// contract), so any prefix of the pipeline can be replayed or swapped out.
// Exit codes: 0 success, 1 usage error, 2 data error (anything deriving
// from gridscope::Error). Genuine bugs are not caught.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gridscope/classify.hpp"
#include "gridscope/fit.hpp"
#include "gridscope/ingest.hpp"
#include "gridscope/log.hpp"
#include "gridscope/manifest.hpp"
#include "gridscope/report.hpp"
#include "gridscope/simulate.hpp"
#include "gridscope/stats.hpp"
#include "gridscope/timeline.hpp"

namespace gridscope {
namespace cli {

// Argument-level problems found after CLI11 parsing; mapped to exit 1 like
// any other usage error. Deliberately not a gridscope::Error.
struct UsageError {
  std::string message;
};

namespace detail {

inline void ensure_parent_dir(const std::filesystem::path& file) {
  const std::filesystem::path parent = file.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

inline SimConfig load_sim_config(const std::string& config_path,
                                 const std::string& scenario) {
  if (config_path.empty() == scenario.empty())
    throw UsageError{"exactly one of --config and --scenario is required"};
  if (!scenario.empty()) {
    if (scenario != "paper-shaped")
      throw UsageError{"unknown scenario: " + scenario + " (try paper-shaped)"};
    return emit_paper_shaped_scenario();
  }
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(config_path + ": " + e.what());
  }
  return config_from_json(j);
}

inline std::vector<Label> parse_label_list(const std::string& labels) {
  if (labels == "all")
    return std::vector<Label>(kAllLabels.begin(), kAllLabels.end());
  std::vector<Label> out;
  std::size_t pos = 0;
  while (pos <= labels.size()) {
    std::size_t next = labels.find(',', pos);
    if (next == std::string::npos) next = labels.size();
    const std::string name = labels.substr(pos, next - pos);
    try {
      out.push_back(label_from_name(name));
    } catch (const Error&) {
      throw UsageError{"unknown label: " + name};
    }
    pos = next + 1;
  }
  return out;
}

}  // namespace detail

struct SimulateArgs {
  std::string config_path;
  std::string scenario;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

inline SimResult cmd_simulate(const SimulateArgs& a) {
  SimConfig cfg = detail::load_sim_config(a.config_path, a.scenario);
  if (a.seed_given) cfg.seed = a.seed;
  SimResult result = run_simulation(cfg, a.out_dir);

  // The effective config (with the effective seed) lands next to the
  // snapshots so the run can be reproduced without the original file.
  {
    std::ofstream out(std::filesystem::path(a.out_dir) / "config.json",
                      std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write config.json under " + a.out_dir);
    out << config_to_json(cfg).dump(2) << '\n';
  }

  RunManifest m;
  m.command = "simulate";
  m.inputs = {a.config_path.empty() ? "scenario:" + a.scenario : a.config_path};
  m.parameters = {{"seed", cfg.seed}};
  m.seed = static_cast<std::int64_t>(cfg.seed);
  m.has_seed = true;
  write_manifest(a.out_dir, m);
  return result;
}

struct ClassifyArgs {
  std::string snapshots_dir;
  std::string out_file;
  ClassifyParams params;
};

struct ClassifyResult {
  std::size_t ads = 0;
  std::size_t frames = 0;
  std::size_t events = 0;
  std::size_t malformed = 0;
};

inline ClassifyResult cmd_classify(const ClassifyArgs& a) {
  // Frames are folded into timelines as they stream in; only one frame is
  // ever held whole, which keeps collector-scale inputs cheap.
  IngestReport report;
  TimelineBuilder builder;
  std::size_t n_frames = 0;
  for_each_snapshot_frame(
      a.snapshots_dir,
      [&](SnapshotFrame&& f) {
        builder.add_frame(f);
        ++n_frames;
      },
      &report);
  const TimelineSet set = builder.finish();
  const std::vector<TerminationEvent> events = classify_events(set, a.params);
  detail::ensure_parent_dir(a.out_file);
  write_events_csv(events, a.out_file);
  log_info("classify: %zu ads in %zu frames -> %zu events (%zu malformed lines)",
           report.ads, n_frames, events.size(), report.malformed.size());
  return {report.ads, n_frames, events.size(), report.malformed.size()};
}

struct StatsArgs {
  std::string events_file;
  std::string out_dir;
  bool deidentify = false;
};

inline void cmd_stats(const StatsArgs& a) {
  const std::vector<TerminationEvent> events = read_events_csv(a.events_file);
  StatsOptions opt;
  opt.deidentify = a.deidentify;
  write_stats_csvs(events, a.out_dir, opt);

  RunManifest m;
  m.command = "stats";
  m.inputs = {a.events_file};
  m.parameters = {{"deidentify", a.deidentify}};
  write_manifest(a.out_dir, m);
}

struct FitArgs {
  std::string events_file;
  std::string cluster = "all";
  std::string labels = "all";
  std::string out_dir;
};

inline std::size_t cmd_fit(const FitArgs& a) {
  const std::vector<TerminationEvent> events = read_events_csv(a.events_file);
  const std::vector<Label> labels = detail::parse_label_list(a.labels);
  const std::string cluster_filter = a.cluster == "all" ? "" : a.cluster;
  if (!cluster_filter.empty()) {
    const bool known = std::any_of(events.begin(), events.end(), [&](const auto& ev) {
      return ev.resource_name == cluster_filter;
    });
    if (!known) throw EmptyInput("no events for cluster " + cluster_filter);
  }

  const std::vector<Family> families(std::begin(kAllFamilies), std::end(kAllFamilies));
  std::filesystem::create_directories(a.out_dir);
  CsvWriter fits_csv(std::filesystem::path(a.out_dir) / "fits.csv",
                     {"cluster", "label", "family", "params", "log_likelihood", "ks", "n"});
  CsvWriter failures_csv(std::filesystem::path(a.out_dir) / "fit_failures.csv",
                         {"cluster", "label", "reason"});
  std::size_t n_fits = 0;
  std::string first_failure;
  for (Label label : labels) {
    const std::vector<double> samples = runtime_samples(events, label, cluster_filter);
    try {
      const std::vector<DistributionFit> ranked = select_best(samples, families);
      const DistributionFit& best = ranked.front();
      fits_csv.row({a.cluster, label_name(label), family_name(best.dist.family),
                    params_to_string(best.dist.params), fmt_double(best.log_likelihood, 4),
                    fmt_double(best.ks, 6), fmt_i64(static_cast<std::int64_t>(best.n))});
      ++n_fits;
    } catch (const Error& e) {
      failures_csv.row({a.cluster, label_name(label), e.what()});
      if (first_failure.empty()) first_failure = e.what();
      log_info("fit: %s/%s skipped: %s", a.cluster.c_str(), label_name(label), e.what());
    }
  }
  fits_csv.close();
  failures_csv.close();
  if (n_fits == 0)
    throw AllFitsFailed("no label produced a fit (first failure: " + first_failure + ")");

  RunManifest m;
  m.command = "fit";
  m.inputs = {a.events_file};
  m.parameters = {{"cluster", a.cluster}, {"labels", a.labels}};
  write_manifest(a.out_dir, m);
  return n_fits;
}

struct ReportArgs {
  std::string stats_dir;
  std::string fits_dir;
  std::string out_file;
};

inline void cmd_report(const ReportArgs& a) {
  detail::ensure_parent_dir(a.out_file);
  write_report(a.stats_dir, a.fits_dir, a.out_file);
}

struct PipelineArgs {
  std::string config_path;
  std::string scenario;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool deidentify = false;
  ClassifyParams classify_params;
};

inline void cmd_pipeline(const PipelineArgs& a) {
  namespace fs = std::filesystem;
  const fs::path out = a.out_dir;
  fs::create_directories(out);

  SimulateArgs sim;
  sim.config_path = a.config_path;
  sim.scenario = a.scenario;
  sim.out_dir = (out / "sim").string();
  sim.seed = a.seed;
  sim.seed_given = a.seed_given;
  const SimResult sim_result = cmd_simulate(sim);
  log_info("pipeline: simulated %zu pilots / %zu instances, %zu ads",
           sim_result.pilots, sim_result.instances, sim_result.ads);

  ClassifyArgs cls;
  cls.snapshots_dir = sim.out_dir;
  cls.out_file = (out / "events.csv").string();
  cls.params = a.classify_params;
  cmd_classify(cls);

  StatsArgs st;
  st.events_file = cls.out_file;
  st.out_dir = (out / "stats").string();
  st.deidentify = a.deidentify;
  cmd_stats(st);

  FitArgs fit;
  fit.events_file = cls.out_file;
  fit.out_dir = (out / "fits").string();
  cmd_fit(fit);

  ReportArgs rep;
  rep.stats_dir = st.out_dir;
  rep.fits_dir = fit.out_dir;
  rep.out_file = (out / "report.md").string();
  cmd_report(rep);

  RunManifest m;
  m.command = "pipeline";
  m.inputs = {a.config_path.empty() ? "scenario:" + a.scenario : a.config_path};
  m.parameters = {{"deidentify", a.deidentify},
                  {"kill_tolerance_s", a.classify_params.kill_tolerance_s},
                  {"idle_timeout_s", a.classify_params.idle_timeout_s},
                  {"lookahead_s", a.classify_params.lookahead_s}};
  if (a.seed_given) {
    m.seed = static_cast<std::int64_t>(a.seed);
    m.has_seed = true;
  }
  write_manifest(out, m);
}

// Parses and runs one invocation. args excludes the program name.
inline int cli_dispatch(std::vector<std::string> args) {
  CLI::App app{"Pilot-job termination analysis pipeline"};
  app.name("gridscope");
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Generate synthetic collector snapshots plus truth.csv");
  sim_cmd->add_option("--config", sim.config_path, "Simulation config JSON")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--scenario", sim.scenario, "Bundled scenario name (paper-shaped)");
  sim_cmd->add_option("--out", sim.out_dir, "Output directory")->required();
  CLI::Option* sim_seed = sim_cmd->add_option("--seed", sim.seed, "Seed override");

  ClassifyArgs cls;
  CLI::App* cls_cmd = app.add_subcommand(
      "classify", "Reconstruct timelines from snapshots and label terminations");
  cls_cmd->add_option("--snapshots", cls.snapshots_dir, "Snapshot directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  cls_cmd->add_option("--out", cls.out_file, "Output events CSV path")->required();
  cls_cmd->add_option("--kill-tolerance", cls.params.kill_tolerance_s,
                      "Seconds before ToDie that still count as Kill");
  cls_cmd->add_option("--idle-timeout", cls.params.idle_timeout_s,
                      "Idle shutdown threshold in seconds");
  cls_cmd->add_option("--lookahead", cls.params.lookahead_s,
                      "Requeue/censoring lookahead window in seconds");

  StatsArgs st;
  CLI::App* st_cmd =
      app.add_subcommand("stats", "Descriptive statistics over classified events");
  st_cmd->add_option("--events", st.events_file, "events.csv from classify")
      ->required()
      ->check(CLI::ExistingFile);
  st_cmd->add_option("--out", st.out_dir, "Output directory")->required();
  st_cmd->add_flag("--deidentify", st.deidentify,
                   "Replace cluster names with C0, C1, ... by descending size");

  FitArgs fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit runtime distributions per label");
  fit_cmd->add_option("--events", fit.events_file, "events.csv from classify")
      ->required()
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--cluster", fit.cluster, "Cluster name, or all (pooled)");
  fit_cmd->add_option("--labels", fit.labels, "Comma-separated labels, or all");
  fit_cmd->add_option("--out", fit.out_dir, "Output directory")->required();

  ReportArgs rep;
  CLI::App* rep_cmd =
      app.add_subcommand("report", "Render a markdown summary of stats and fits");
  rep_cmd->add_option("--stats", rep.stats_dir, "Stats directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  rep_cmd->add_option("--fits", rep.fits_dir, "Fits directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  rep_cmd->add_option("--out", rep.out_file, "Output report path")->required();

  PipelineArgs pipe;
  CLI::App* pipe_cmd = app.add_subcommand(
      "pipeline", "simulate -> classify -> stats -> fit -> report in one go");
  pipe_cmd->add_option("--config", pipe.config_path, "Simulation config JSON")
      ->check(CLI::ExistingFile);
  pipe_cmd->add_option("--scenario", pipe.scenario,
                       "Bundled scenario name (paper-shaped)");
  pipe_cmd->add_option("--out", pipe.out_dir, "Output directory")->required();
  CLI::Option* pipe_seed = pipe_cmd->add_option("--seed", pipe.seed, "Seed override");
  pipe_cmd->add_flag("--deidentify", pipe.deidentify, "De-identify cluster names");
  pipe_cmd->add_option("--kill-tolerance", pipe.classify_params.kill_tolerance_s,
                       "Seconds before ToDie that still count as Kill");
  pipe_cmd->add_option("--idle-timeout", pipe.classify_params.idle_timeout_s,
                       "Idle shutdown threshold in seconds");
  pipe_cmd->add_option("--lookahead", pipe.classify_params.lookahead_s,
                       "Requeue/censoring lookahead window in seconds");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim_cmd->parsed()) {
      sim.seed_given = sim_seed->count() > 0;
      cmd_simulate(sim);
    } else if (cls_cmd->parsed()) {
      cmd_classify(cls);
    } else if (st_cmd->parsed()) {
      cmd_stats(st);
    } else if (fit_cmd->parsed()) {
      cmd_fit(fit);
    } else if (rep_cmd->parsed()) {
      cmd_report(rep);
    } else if (pipe_cmd->parsed()) {
      pipe.seed_given = pipe_seed->count() > 0;
      cmd_pipeline(pipe);
    }
  } catch (const UsageError& e) {
    log_error("%s", e.message.c_str());
    return 1;
  } catch (const Error& e) {
    log_error("%s", e.what());
    return 2;
  }
  return 0;
}

inline int cli_dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(std::move(args));
}

}  // namespace cli
}  // namespace gridscope
