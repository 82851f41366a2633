#pragma once

// Termination classifier. Each disappearance (or observation gap) becomes
// one labeled event. The rule order is fixed and first-match-wins:
//
//   1. reappearance after missing frames        -> NetworkIssue
//   2. event at/after ToDie minus tolerance     -> Kill
//   3. a later instance under the same key      -> Preemption (requeued)
//   4. past ToRetire while Claimed/Retiring     -> Retire
//   5. trailing idle span >= idle timeout,
//      before ToRetire                          -> IdleShutDown
//   6. anything else                            -> Preemption (destructive)
//
// Events close to the end of the observation window cannot be ruled out
// as requeues whose successor we have not seen yet; those are flagged
// censored_lookahead rather than dropped.

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "gridscope/csv.hpp"
#include "gridscope/errors.hpp"
#include "gridscope/timeline.hpp"

namespace gridscope {

enum class Label { Retire, Kill, IdleShutDown, Preemption, NetworkIssue };

inline constexpr std::array<Label, 5> kAllLabels = {
    Label::Retire, Label::Kill, Label::IdleShutDown, Label::Preemption,
    Label::NetworkIssue};

inline const char* label_name(Label l) {
  switch (l) {
    case Label::Retire: return "Retire";
    case Label::Kill: return "Kill";
    case Label::IdleShutDown: return "IdleShutDown";
    case Label::Preemption: return "Preemption";
    case Label::NetworkIssue: return "NetworkIssue";
  }
  return "?";
}

inline Label label_from_name(const std::string& s) {
  for (Label l : kAllLabels)
    if (s == label_name(l)) return l;
  throw CsvError("unknown label: " + s);
}

struct ClassifyParams {
  std::int64_t kill_tolerance_s = 600;
  std::int64_t idle_timeout_s = 1200;
  std::int64_t lookahead_s = 86400;
};

struct TerminationEvent {
  PilotKey key;
  std::string instance_name;
  std::string resource_name;
  std::string site;
  std::int64_t event_time = 0;
  Label label = Label::Preemption;
  std::int64_t instance_runtime = 0;
  std::int64_t to_retire = 0;
  std::int64_t to_die = 0;
  std::string evidence;
  bool censored_lookahead = false;
};

namespace detail {

// Start of the trailing Unclaimed run, measured from the pilot's side:
// the last moment we know it was doing something else. Falls back to the
// daemon start when the whole trail is Unclaimed.
inline std::int64_t idle_anchor(const InstanceRecord& inst) {
  for (auto it = inst.trail.rbegin(); it != inst.trail.rend(); ++it)
    if (it->state != AdState::Unclaimed) return it->my_current_time;
  return inst.daemon_start_time;
}

}  // namespace detail

inline std::vector<TerminationEvent> classify_events(const TimelineSet& set,
                                                     const ClassifyParams& params = {}) {
  std::vector<TerminationEvent> events;
  if (set.frame_times.empty()) return events;
  const std::int64_t obs_end = set.frame_times.back();
  const std::int64_t censor_cut = obs_end - params.lookahead_s;

  auto base_event = [&](const PilotTimeline& tl, const InstanceRecord& inst) {
    TerminationEvent ev;
    ev.key = tl.key;
    ev.instance_name = inst.name;
    ev.resource_name = tl.resource_name;
    ev.site = tl.site;
    return ev;
  };

  for (const PilotTimeline& tl : set.pilots) {
    for (std::size_t i = 0; i < tl.instances.size(); ++i) {
      const InstanceRecord& inst = tl.instances[i];

      // Rule 1: each observation gap is its own event.
      for (const InstanceGap& gap : inst.gaps) {
        TerminationEvent ev = base_event(tl, inst);
        ev.event_time = set.frame_times[gap.last_present_index + 1];
        ev.label = Label::NetworkIssue;
        // Trail entry that ends just before the gap.
        const TrailEntry* before = nullptr;
        for (const TrailEntry& te : inst.trail) {
          if (te.frame_time > gap.last_present_time) break;
          before = &te;
        }
        ev.instance_runtime = before->my_current_time - inst.daemon_start_time;
        ev.to_retire = before->to_retire;
        ev.to_die = before->to_die;
        ev.evidence = "absent " + std::to_string(gap.reappear_time - gap.last_present_time) +
                      "s, reappeared at " + std::to_string(gap.reappear_time);
        ev.censored_lookahead = ev.event_time > censor_cut;
        events.push_back(std::move(ev));
      }

      // Rules 2-6 apply to the final disappearance only.
      if (inst.last_frame_index + 1 >= set.frame_times.size()) continue;  // censored
      const std::int64_t t_ev = set.frame_times[inst.last_frame_index + 1];
      const TrailEntry& last = inst.trail.back();

      TerminationEvent ev = base_event(tl, inst);
      ev.event_time = t_ev;
      ev.instance_runtime = instance_runtime(inst);
      ev.to_retire = last.to_retire;
      ev.to_die = last.to_die;
      ev.censored_lookahead = t_ev > censor_cut;

      if (t_ev >= last.to_die - params.kill_tolerance_s) {
        ev.label = Label::Kill;
        ev.evidence = "disappeared " + std::to_string(last.to_die - t_ev) +
                      "s before to_die (tolerance " +
                      std::to_string(params.kill_tolerance_s) + "s)";
      } else if (i + 1 < tl.instances.size()) {
        ev.label = Label::Preemption;
        ev.evidence = "requeued as " + tl.instances[i + 1].name;
      } else if (last.my_current_time >= last.to_retire &&
                 (last.state == AdState::Claimed || last.state == AdState::Retiring)) {
        ev.label = Label::Retire;
        ev.evidence = std::string("past to_retire in state ") + ad_state_name(last.state);
      } else {
        const std::int64_t span =
            last.state == AdState::Unclaimed ? t_ev - detail::idle_anchor(inst) : 0;
        if (last.state == AdState::Unclaimed && span >= params.idle_timeout_s &&
            t_ev < last.to_retire) {
          ev.label = Label::IdleShutDown;
          ev.evidence = "trailing idle span " + std::to_string(span) + "s";
        } else {
          ev.label = Label::Preemption;
          ev.evidence = "destructive: no requeue observed";
        }
      }
      events.push_back(std::move(ev));
    }
  }

  std::sort(events.begin(), events.end(),
            [](const TerminationEvent& a, const TerminationEvent& b) {
              if (a.event_time != b.event_time) return a.event_time < b.event_time;
              if (a.key != b.key) return a.key < b.key;
              return a.instance_name < b.instance_name;
            });
  return events;
}

struct LabelSummary {
  std::size_t total = 0;
  std::array<std::size_t, 5> counts{};     // indexed by Label
  std::array<double, 5> fractions{};
  std::size_t distinct_pilots = 0;
  std::size_t distinct_instances = 0;
  std::size_t censored_lookahead = 0;

  std::size_t count(Label l) const { return counts[static_cast<std::size_t>(l)]; }
  double fraction(Label l) const { return fractions[static_cast<std::size_t>(l)]; }
};

inline LabelSummary summarize_labels(const std::vector<TerminationEvent>& events) {
  if (events.empty()) throw EmptyInput("no events to summarize");
  LabelSummary s;
  s.total = events.size();
  std::set<PilotKey> pilots;
  std::set<std::pair<PilotKey, std::string>> instances;
  for (const TerminationEvent& ev : events) {
    s.counts[static_cast<std::size_t>(ev.label)]++;
    if (ev.censored_lookahead) s.censored_lookahead++;
    pilots.insert(ev.key);
    instances.insert({ev.key, ev.instance_name});
  }
  s.distinct_pilots = pilots.size();
  s.distinct_instances = instances.size();
  for (std::size_t i = 0; i < s.counts.size(); ++i)
    s.fractions[i] = static_cast<double>(s.counts[i]) / static_cast<double>(s.total);
  return s;
}

inline const std::vector<std::string>& events_csv_header() {
  static const std::vector<std::string> header = {
      "site_wms_job_id", "entry_name", "instance_name", "resource_name",
      "site",            "event_time", "label",         "instance_runtime",
      "to_retire",       "to_die",     "evidence",      "censored_lookahead"};
  return header;
}

inline void write_events_csv(const std::vector<TerminationEvent>& events,
                             const std::filesystem::path& path) {
  CsvWriter w(path, events_csv_header());
  for (const TerminationEvent& ev : events)
    w.row({ev.key.site_wms_job_id, ev.key.entry_name, ev.instance_name, ev.resource_name,
           ev.site, fmt_i64(ev.event_time), label_name(ev.label),
           fmt_i64(ev.instance_runtime), fmt_i64(ev.to_retire), fmt_i64(ev.to_die),
           ev.evidence, ev.censored_lookahead ? "1" : "0"});
}

inline std::vector<TerminationEvent> read_events_csv(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  if (t.header != events_csv_header()) throw CsvError(path.string() + ": unexpected header");
  std::vector<TerminationEvent> events;
  events.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    TerminationEvent ev;
    ev.key = {r[0], r[1]};
    ev.instance_name = r[2];
    ev.resource_name = r[3];
    ev.site = r[4];
    ev.event_time = std::stoll(r[5]);
    ev.label = label_from_name(r[6]);
    ev.instance_runtime = std::stoll(r[7]);
    ev.to_retire = std::stoll(r[8]);
    ev.to_die = std::stoll(r[9]);
    ev.evidence = r[10];
    ev.censored_lookahead = r[11] == "1";
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace gridscope
