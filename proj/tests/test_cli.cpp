// CLI-level tests: exit codes, the file-based stage contracts, manifests,
// and full-pipeline determinism. Everything goes through cli_dispatch, the
// same function main() wraps.

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gridscope/cli.hpp"
#include "helpers.hpp"

using namespace gridscope;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) { return cli::cli_dispatch(std::move(args)); }

std::string p(const fs::path& base, const char* leaf) { return (base / leaf).string(); }

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2);
}

// All idle shutdowns: nothing to claim, no hazard, no outages, everything
// dies inside the window. Termination count is then exactly the pilot count.
SimConfig idle_only_config() {
  SimConfig cfg;
  cfg.duration_s = 10800;
  cfg.snapshot_interval_s = 120;
  cfg.advertise_interval_s = 300;
  cfg.graceful_linger_s = 180;
  cfg.seed = 9001;
  SiteConfig a;
  a.resource_name = "res_a";
  a.site = "SiteA";
  a.entry_name = "entry_a";
  a.pilot_arrival_rate_per_hour = 120.0;
  a.arrival_window_s = 3600;
  a.payload_supply = 0.0;
  SiteConfig b = a;
  b.resource_name = "res_b";
  b.site = "SiteB";
  b.entry_name = "entry_b";
  b.pilot_arrival_rate_per_hour = 60.0;
  cfg.sites = {a, b};
  return cfg;
}

// Mixed outcomes with enough preemption spread that the fit stage has at
// least one healthy sample group.
SimConfig pipeline_config() {
  SimConfig cfg;
  cfg.duration_s = 14400;
  cfg.snapshot_interval_s = 180;
  cfg.advertise_interval_s = 300;
  cfg.graceful_linger_s = 180;
  cfg.seed = 31337;
  SiteConfig a;
  a.resource_name = "res_a";
  a.site = "SiteA";
  a.entry_name = "entry_a";
  a.pilot_arrival_rate_per_hour = 120.0;
  a.arrival_window_s = 7200;
  a.payload_supply = 0.5;
  a.payload_duration = {Family::Gamma, {2.0, 0.0, 1800.0}};
  a.preemption_hazard_per_hour = 2.0;
  a.requeue_probability = 0.4;
  a.max_requeues = 3;
  SiteConfig b = a;
  b.resource_name = "res_b";
  b.site = "SiteB";
  b.entry_name = "entry_b";
  b.pilot_arrival_rate_per_hour = 60.0;
  b.preemption_hazard_per_hour = 1.0;
  cfg.sites = {a, b};
  return cfg;
}

std::map<std::string, std::string> hash_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), root).generic_string()] =
        checksum_hex(checksum_file(entry.path()));
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit 1", "[cli]") {
  CHECK(run({"frobnicate"}) == 1);
  CHECK(run({}) == 1);
  CHECK(run({"simulate"}) == 1);                       // missing --out
  CHECK(run({"classify", "--out", "x.csv"}) == 1);     // missing --snapshots
  CHECK(run({"classify", "--snapshots", "/nonexistent/dir", "--out", "x.csv"}) == 1);
  CHECK(run({"stats", "--events", "/nonexistent/events.csv", "--out", "x"}) == 1);

  gridtest::TempDir tmp;
  // --config and --scenario are mutually exclusive and one is required.
  CHECK(run({"simulate", "--out", p(tmp.path, "o1"), "--scenario", "nope"}) == 1);
  const fs::path cfg_path = tmp.path / "cfg.json";
  write_json(cfg_path, config_to_json(idle_only_config()));
  CHECK(run({"simulate", "--out", p(tmp.path, "o2"), "--config", cfg_path.string(),
             "--scenario", "paper-shaped"}) == 1);
  CHECK(run({"simulate", "--out", p(tmp.path, "o3")}) == 1);
}

TEST_CASE("help exits 0", "[cli]") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"simulate", "--help"}) == 0);
}

TEST_CASE("data errors exit 2", "[cli]") {
  gridtest::TempDir tmp;
  const fs::path empty_dir = tmp.path / "empty";
  fs::create_directories(empty_dir);
  CHECK(run({"classify", "--snapshots", empty_dir.string(), "--out",
             p(tmp.path, "events.csv")}) == 2);

  const fs::path bad_cfg = tmp.path / "bad.json";
  gridtest::write_raw(tmp.path, "bad.json", "{ not json");
  CHECK(run({"simulate", "--config", bad_cfg.string(), "--out", p(tmp.path, "out")}) == 2);

  // Valid JSON, invalid config.
  const fs::path crossed = tmp.path / "crossed.json";
  SimConfig cfg = idle_only_config();
  cfg.sites.clear();
  write_json(crossed, config_to_json(cfg));
  CHECK(run({"simulate", "--config", crossed.string(), "--out", p(tmp.path, "out2")}) == 2);
}

TEST_CASE("simulate then classify conserves events", "[cli]") {
  gridtest::TempDir tmp;
  const fs::path cfg_path = tmp.path / "cfg.json";
  write_json(cfg_path, config_to_json(idle_only_config()));
  const std::string sim_dir = p(tmp.path, "sim");
  REQUIRE(run({"simulate", "--config", cfg_path.string(), "--out", sim_dir}) == 0);
  const std::string events_path = p(tmp.path, "events.csv");
  REQUIRE(run({"classify", "--snapshots", sim_dir, "--out", events_path}) == 0);

  const CsvTable truth = read_csv(fs::path(sim_dir) / "truth.csv");
  const CsvTable events = read_csv(events_path);
  REQUIRE(truth.rows.size() > 100);
  CHECK(events.rows.size() == truth.rows.size());

  // Output directory carries exactly one manifest whose checksums match
  // the files on disk.
  std::size_t manifests = 0;
  for (const auto& entry : fs::directory_iterator(sim_dir))
    if (entry.path().filename() == "manifest.json") ++manifests;
  CHECK(manifests == 1);
  const RunManifest m = read_manifest(sim_dir);
  CHECK(m.command == "simulate");
  REQUIRE(m.outputs.count("truth.csv") == 1);
  CHECK(m.outputs.at("truth.csv") ==
        checksum_hex(checksum_file(fs::path(sim_dir) / "truth.csv")));
  CHECK(m.outputs.count("manifest.json") == 0);
}

TEST_CASE("stats and fit and report round trip", "[cli]") {
  gridtest::TempDir tmp;
  const fs::path cfg_path = tmp.path / "cfg.json";
  write_json(cfg_path, config_to_json(pipeline_config()));
  const std::string sim_dir = p(tmp.path, "sim");
  REQUIRE(run({"simulate", "--config", cfg_path.string(), "--out", sim_dir}) == 0);
  const std::string events_path = p(tmp.path, "events.csv");
  REQUIRE(run({"classify", "--snapshots", sim_dir, "--out", events_path,
               "--lookahead", "3600"}) == 0);

  const std::string stats_dir = p(tmp.path, "stats");
  REQUIRE(run({"stats", "--events", events_path, "--out", stats_dir}) == 0);
  CHECK(fs::exists(fs::path(stats_dir) / "class_mix.csv"));
  CHECK(fs::exists(fs::path(stats_dir) / "chain.csv"));
  CHECK(fs::exists(fs::path(stats_dir) / "manifest.json"));

  // De-identified rerun aliases the clusters.
  const std::string deid_dir = p(tmp.path, "stats_deid");
  REQUIRE(run({"stats", "--events", events_path, "--out", deid_dir, "--deidentify"}) == 0);
  const CsvTable cc = read_csv(fs::path(deid_dir) / "cluster_counts.csv");
  REQUIRE(cc.rows.size() == 2);
  CHECK(cc.rows[0][cc.col("cluster")] == "C0");
  CHECK(cc.rows[1][cc.col("cluster")] == "C1");

  const std::string fits_dir = p(tmp.path, "fits");
  REQUIRE(run({"fit", "--events", events_path, "--cluster", "all", "--labels", "all",
               "--out", fits_dir}) == 0);
  const CsvTable fits = read_csv(fs::path(fits_dir) / "fits.csv");
  CHECK(!fits.rows.empty());
  for (const auto& row : fits.rows) CHECK(row[fits.col("cluster")] == "all");

  CHECK(run({"fit", "--events", events_path, "--labels", "NotALabel", "--out",
             p(tmp.path, "fx")}) == 1);
  CHECK(run({"fit", "--events", events_path, "--cluster", "no_such_cluster", "--out",
             p(tmp.path, "fy")}) == 2);

  const std::string report_path = p(tmp.path, "report.md");
  REQUIRE(run({"report", "--stats", stats_dir, "--fits", fits_dir, "--out",
               report_path}) == 0);
  std::ifstream in(report_path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  CHECK(text.find("## Label mix") != std::string::npos);
  CHECK(text.find("## Preemption chain") != std::string::npos);
  CHECK(text.find("## Fitted runtime distributions") != std::string::npos);
}

TEST_CASE("pipeline reruns are byte-identical", "[cli]") {
  gridtest::TempDir tmp;
  const fs::path cfg_path = tmp.path / "cfg.json";
  write_json(cfg_path, config_to_json(pipeline_config()));
  const std::string out_dir = p(tmp.path, "out");

  REQUIRE(run({"pipeline", "--config", cfg_path.string(), "--out", out_dir, "--seed",
               "7", "--lookahead", "3600"}) == 0);
  const auto first = hash_tree(out_dir);
  REQUIRE(first.count("events.csv") == 1);
  REQUIRE(first.count("report.md") == 1);
  REQUIRE(first.count("sim/truth.csv") == 1);
  REQUIRE(first.count("stats/class_mix.csv") == 1);
  REQUIRE(first.count("fits/fits.csv") == 1);
  REQUIRE(first.count("manifest.json") == 1);

  fs::remove_all(out_dir);
  REQUIRE(run({"pipeline", "--config", cfg_path.string(), "--out", out_dir, "--seed",
               "7", "--lookahead", "3600"}) == 0);
  const auto second = hash_tree(out_dir);
  CHECK(first == second);

  // A different seed must actually change the data.
  fs::remove_all(out_dir);
  REQUIRE(run({"pipeline", "--config", cfg_path.string(), "--out", out_dir, "--seed",
               "8", "--lookahead", "3600"}) == 0);
  const auto third = hash_tree(out_dir);
  CHECK(third.at("events.csv") != first.at("events.csv"));

  // Each stage directory carries exactly one manifest.
  for (const char* dir : {"", "sim", "stats", "fits"}) {
    std::size_t manifests = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(out_dir) / dir))
      if (entry.path().filename() == "manifest.json") ++manifests;
    CHECK(manifests == 1);
  }
}
