#pragma once

// Shared fixtures for the test suite: ad construction with sane defaults,
// snapshot files on disk, and a self-cleaning temp directory.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gridscope/ads.hpp"

namespace gridtest {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;

  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("gridscope_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

struct AdSpec {
  std::string name = "glidein_1@node1";
  std::string state = "Claimed";
  std::string activity = "Busy";
  std::int64_t mct = 1000;
  std::int64_t run = 0;
  std::int64_t dst = 500;
  std::int64_t to_retire = 55000;
  std::int64_t to_die = 83000;
  std::string site = "SiteA";
  std::string entry = "entry_a";
  std::string resource = "res_a";
  std::string job = "1234.0";
};

inline gridscope::PilotAd make_ad(const AdSpec& s) {
  gridscope::PilotAd ad;
  ad.name = s.name;
  ad.state_raw = s.state;
  ad.state = gridscope::parse_ad_state(s.state);
  ad.activity = s.activity;
  ad.my_current_time = s.mct;
  ad.total_job_run_time = s.run;
  ad.daemon_start_time = s.dst;
  ad.to_retire = s.to_retire;
  ad.to_die = s.to_die;
  ad.site = s.site;
  ad.entry_name = s.entry;
  ad.resource_name = s.resource;
  ad.site_wms_job_id = s.job;
  return ad;
}

inline fs::path write_snapshot(const fs::path& dir, std::int64_t t,
                               const std::vector<gridscope::PilotAd>& ads) {
  fs::path file = dir / ("snapshot_" + std::to_string(t) + ".jsonl");
  std::ofstream out(file, std::ios::binary);
  for (const auto& ad : ads) out << gridscope::ad_to_jsonl(ad) << '\n';
  return file;
}

inline fs::path write_raw(const fs::path& dir, const std::string& filename,
                          const std::string& content) {
  fs::path file = dir / filename;
  std::ofstream out(file, std::ios::binary);
  out << content;
  return file;
}

// Frames built in memory for timeline/classifier tests. Each ad's
// MyCurrentTime defaults to the frame time unless the spec overrides it.
inline gridscope::SnapshotFrame frame_at(std::int64_t t,
                                         std::vector<gridscope::PilotAd> ads) {
  gridscope::SnapshotFrame f;
  f.frame_time = t;
  f.ads = std::move(ads);
  return f;
}

}  // namespace gridtest
