#pragma once

// Timeline reconstruction. Frames arrive in timestamp order; we fold them
// into one timeline per pilot key, split into instances wherever the
// (Name, DaemonStartTime) pair changes. A pilot that misses frames and
// then reappears with the same identity gets a gap, not a new instance.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridscope/ads.hpp"
#include "gridscope/csv.hpp"
#include "gridscope/errors.hpp"

namespace gridscope {

struct TrailEntry {
  std::int64_t frame_time = 0;
  AdState state = AdState::Other;
  std::string activity;
  std::int64_t my_current_time = 0;
  std::int64_t to_retire = 0;
  std::int64_t to_die = 0;
};

struct InstanceGap {
  std::int64_t last_present_time = 0;  // frame_time of the last frame containing the ad
  std::int64_t reappear_time = 0;      // frame_time of the frame where it came back
  std::size_t last_present_index = 0;
  std::size_t reappear_index = 0;
};

struct InstanceRecord {
  std::string name;
  std::int64_t daemon_start_time = 0;
  std::int64_t first_seen = 0;  // MyCurrentTime of first ad
  std::int64_t last_seen = 0;   // MyCurrentTime of last ad
  std::size_t first_frame_index = 0;
  std::size_t last_frame_index = 0;
  std::vector<TrailEntry> trail;
  std::vector<InstanceGap> gaps;
};

struct PilotTimeline {
  PilotKey key;
  std::string resource_name;
  std::string site;
  std::vector<InstanceRecord> instances;  // in order of first appearance
};

struct TimelineSet {
  std::vector<PilotTimeline> pilots;     // sorted by key
  std::vector<std::int64_t> frame_times;
  std::vector<std::string> diagnostics;
};

class TimelineBuilder {
 public:
  void add_frame(const SnapshotFrame& frame) {
    if (!frame_times_.empty() && frame.frame_time <= frame_times_.back())
      throw NonMonotoneTimestamps("frame t=" + std::to_string(frame.frame_time) +
                                  " not after t=" + std::to_string(frame_times_.back()));
    const std::size_t idx = frame_times_.size();
    frame_times_.push_back(frame.frame_time);

    for (const PilotAd& ad : frame.ads) {
      Slot& slot = slots_[ad.key()];
      if (slot.timeline.instances.empty()) {
        slot.timeline.key = ad.key();
        slot.timeline.resource_name = ad.resource_name;
        slot.timeline.site = ad.site;
      }
      InstanceRecord* cur =
          slot.timeline.instances.empty() ? nullptr : &slot.timeline.instances.back();
      const bool same_instance = cur != nullptr && cur->name == ad.name &&
                                 cur->daemon_start_time == ad.daemon_start_time;
      if (!same_instance) {
        if (cur != nullptr) {
          if (cur->name == ad.name && ad.daemon_start_time < cur->daemon_start_time)
            diagnostics_.push_back("pilot " + ad.key().display() + " instance " + ad.name +
                                   " restarted with earlier DaemonStartTime (" +
                                   std::to_string(ad.daemon_start_time) + " < " +
                                   std::to_string(cur->daemon_start_time) + ")");
          else if (ad.daemon_start_time < cur->daemon_start_time)
            diagnostics_.push_back("pilot " + ad.key().display() +
                                   " instances appear out of DaemonStartTime order (" +
                                   ad.name + " at " + std::to_string(ad.daemon_start_time) +
                                   " after " + cur->name + " at " +
                                   std::to_string(cur->daemon_start_time) + ")");
        }
        slot.timeline.instances.emplace_back();
        cur = &slot.timeline.instances.back();
        cur->name = ad.name;
        cur->daemon_start_time = ad.daemon_start_time;
        cur->first_seen = ad.my_current_time;
        cur->first_frame_index = idx;
      } else if (idx > cur->last_frame_index + 1) {
        cur->gaps.push_back({frame_times_[cur->last_frame_index], frame.frame_time,
                             cur->last_frame_index, idx});
      }
      cur->last_seen = ad.my_current_time;
      cur->last_frame_index = idx;
      cur->trail.push_back({frame.frame_time, ad.state, ad.activity, ad.my_current_time,
                            ad.to_retire, ad.to_die});
    }
  }

  TimelineSet finish() {
    TimelineSet set;
    set.frame_times = std::move(frame_times_);
    set.diagnostics = std::move(diagnostics_);
    set.pilots.reserve(slots_.size());
    for (auto& [key, slot] : slots_) set.pilots.push_back(std::move(slot.timeline));
    slots_.clear();
    return set;
  }

 private:
  struct Slot {
    PilotTimeline timeline;
  };
  std::map<PilotKey, Slot> slots_;  // ordered: output is deterministic
  std::vector<std::int64_t> frame_times_;
  std::vector<std::string> diagnostics_;
};

inline TimelineSet build_timelines(const std::vector<SnapshotFrame>& frames) {
  TimelineBuilder builder;
  for (const SnapshotFrame& f : frames) builder.add_frame(f);
  return builder.finish();
}

// Observed runtime: the pilot was certainly alive from DaemonStartTime to
// the last MyCurrentTime it reported. Never negative for validated ads.
inline std::int64_t instance_runtime(const InstanceRecord& inst) {
  return inst.last_seen - inst.daemon_start_time;
}

struct PotentialTermination {
  std::size_t pilot_index = 0;
  std::size_t instance_index = 0;
  std::int64_t termination_time = 0;  // frame_time of first frame without the ad
};

// One candidate event per instance that is absent from the final frame.
// Instances still present at the end are right-censored and omitted.
inline std::vector<PotentialTermination> potential_terminations(const TimelineSet& set) {
  std::vector<PotentialTermination> out;
  if (set.frame_times.empty()) return out;
  const std::size_t last_idx = set.frame_times.size() - 1;
  for (std::size_t p = 0; p < set.pilots.size(); ++p) {
    const PilotTimeline& tl = set.pilots[p];
    for (std::size_t i = 0; i < tl.instances.size(); ++i) {
      const InstanceRecord& inst = tl.instances[i];
      if (inst.last_frame_index >= last_idx) continue;
      out.push_back({p, i, set.frame_times[inst.last_frame_index + 1]});
    }
  }
  return out;
}

// Debug dump, one row per instance.
inline void write_timeline_csv(const TimelineSet& set, const std::filesystem::path& path) {
  CsvWriter w(path, {"site_wms_job_id", "entry_name", "instance_name", "resource_name",
                     "site", "daemon_start_time", "first_seen", "last_seen", "runtime",
                     "frames", "gaps"});
  for (const PilotTimeline& tl : set.pilots)
    for (const InstanceRecord& inst : tl.instances)
      w.row({tl.key.site_wms_job_id, tl.key.entry_name, inst.name, tl.resource_name,
             tl.site, fmt_i64(inst.daemon_start_time), fmt_i64(inst.first_seen),
             fmt_i64(inst.last_seen), fmt_i64(instance_runtime(inst)),
             fmt_i64(static_cast<std::int64_t>(inst.trail.size())),
             fmt_i64(static_cast<std::int64_t>(inst.gaps.size()))});
}

}  // namespace gridscope
