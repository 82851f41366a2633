#pragma once

// Snapshot ingest. One file per collector snapshot, named
// snapshot_<epoch>.jsonl, one ad per line. Bad lines are quarantined and
// counted, never silently dropped; structural problems (bad filename,
// duplicate key inside one frame, non-monotone directory) throw.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridscope/ads.hpp"
#include "gridscope/errors.hpp"
#include "gridscope/log.hpp"

namespace gridscope {

struct IngestOptions {
  std::int64_t clock_skew_tolerance_s = 300;  // |MyCurrentTime - frame_time| bound
  std::int64_t gap_tolerance_s = 180;         // inter-frame gaps above this are reported
};

struct LineIssue {
  std::string file;
  std::size_t line_no = 0;  // 1-based
  std::string reason;
};

struct FrameGap {
  std::int64_t from_time = 0;
  std::int64_t to_time = 0;
  std::int64_t length() const { return to_time - from_time; }
};

struct IngestReport {
  std::size_t files = 0;
  std::size_t lines = 0;
  std::size_t ads = 0;
  std::vector<LineIssue> malformed;
  std::vector<FrameGap> gaps;
};

// Throws BadFilename unless the basename is exactly snapshot_<digits>.jsonl.
inline std::int64_t frame_time_from_filename(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  const std::string prefix = "snapshot_";
  const std::string suffix = ".jsonl";
  if (name.size() <= prefix.size() + suffix.size() ||
      name.compare(0, prefix.size(), prefix) != 0 ||
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
    throw BadFilename(name);
  const std::string digits =
      name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
  if (digits.empty()) throw BadFilename(name);
  std::int64_t ts = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw BadFilename(name);
    ts = ts * 10 + (c - '0');
  }
  return ts;
}

inline bool is_snapshot_filename(const std::filesystem::path& path) {
  try {
    frame_time_from_filename(path);
    return true;
  } catch (const BadFilename&) {
    return false;
  }
}

inline SnapshotFrame parse_snapshot_file(const std::filesystem::path& path,
                                         IngestReport* report = nullptr,
                                         const IngestOptions& opt = {}) {
  SnapshotFrame frame;
  frame.frame_time = frame_time_from_filename(path);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::set<PilotKey> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (report) ++report->lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::string reason;
    try {
      if (line.empty()) throw MalformedAd("empty line");
      nlohmann::json j = nlohmann::json::parse(line, nullptr, true);
      PilotAd ad = ad_from_json(j);
      const std::int64_t skew = ad.my_current_time - frame.frame_time;
      if (skew > opt.clock_skew_tolerance_s || skew < -opt.clock_skew_tolerance_s)
        throw MalformedAd("MyCurrentTime off frame time by " + std::to_string(skew) + "s");
      if (!seen.insert(ad.key()).second)
        throw DuplicateKeyInFrame(ad.key().display());
      frame.ads.push_back(std::move(ad));
      if (report) ++report->ads;
      continue;
    } catch (const nlohmann::json::parse_error& e) {
      reason = std::string("invalid JSON: ") + e.what();
    } catch (const MalformedAd& e) {
      reason = e.what();
    }
    // DuplicateKeyInFrame propagates: that is frame corruption, not line noise.
    if (report) report->malformed.push_back({path.filename().string(), line_no, reason});
    log_debug("%s:%zu quarantined: %s", path.filename().string().c_str(), line_no,
              reason.c_str());
  }
  if (report) ++report->files;
  return frame;
}

// Streams frames in timestamp order. Keeps only one frame in memory, which
// matters at collector scale. Fills the gap report as a side effect.
inline void for_each_snapshot_frame(const std::filesystem::path& dir,
                                    const std::function<void(SnapshotFrame&&)>& fn,
                                    IngestReport* report = nullptr,
                                    const IngestOptions& opt = {}) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw EmptyDirectory(dir.string());

  std::vector<std::pair<std::int64_t, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (!is_snapshot_filename(entry.path())) continue;
    files.emplace_back(frame_time_from_filename(entry.path()), entry.path());
  }
  if (files.empty()) throw EmptyDirectory(dir.string());
  std::sort(files.begin(), files.end());

  for (std::size_t i = 1; i < files.size(); ++i) {
    if (files[i].first == files[i - 1].first)
      throw NonMonotoneTimestamps("two snapshots claim t=" +
                                  std::to_string(files[i].first));
    if (report && files[i].first - files[i - 1].first > opt.gap_tolerance_s)
      report->gaps.push_back({files[i - 1].first, files[i].first});
  }

  for (const auto& [ts, path] : files) fn(parse_snapshot_file(path, report, opt));
}

inline std::vector<SnapshotFrame> load_snapshot_dir(const std::filesystem::path& dir,
                                                    IngestReport* report = nullptr,
                                                    const IngestOptions& opt = {}) {
  std::vector<SnapshotFrame> frames;
  for_each_snapshot_frame(
      dir, [&frames](SnapshotFrame&& f) { frames.push_back(std::move(f)); }, report, opt);
  return frames;
}

}  // namespace gridscope
