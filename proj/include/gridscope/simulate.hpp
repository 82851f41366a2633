#pragma once

// Discrete-event synthetic grid. Emits collector snapshot files plus a
// truth.csv of per-instance termination labels, so the reconstruction and
// classification layers can be scored against known answers.
//
// Pilots are mutually independent (no shared queue), so the run processes
// one pilot job at a time with its own deterministic RNG stream and then
// renders frames with a sweep over instance lifetimes. Within one pilot the
// event order at equal timestamps is fixed: advertise refreshes happen
// before deaths, and natural deaths beat a same-second preemption. Output
// bytes depend only on (config, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridscope/ads.hpp"
#include "gridscope/classify.hpp"
#include "gridscope/csv.hpp"
#include "gridscope/distributions.hpp"
#include "gridscope/errors.hpp"
#include "gridscope/log.hpp"

namespace gridscope {

struct OutageConfig {
  double rate_per_hour = 0.0;  // per pilot instance
  Dist duration{Family::Uniform, {300.0, 3600.0}};
};

struct SiteConfig {
  std::string resource_name;
  std::string site;
  std::string entry_name;

  double pilot_arrival_rate_per_hour = 0.0;  // Poisson
  std::int64_t arrival_window_s = 0;         // 0 means the whole run

  // Lifetime deadlines stamped at pilot startup.
  std::int64_t to_retire_offset_s = 54000;  // 15 h
  std::int64_t to_die_offset_s = 82800;     // 23 h
  double offset_jitter_frac = 0.01;

  // Preemption hazard: base rate, a multiplier over the first
  // early_burst_window_s of instance life, and a 24 h cosine profile.
  double preemption_hazard_per_hour = 0.0;
  double early_burst_multiplier = 1.0;
  std::int64_t early_burst_window_s = 3600;
  double diurnal_amplitude = 0.0;
  std::int64_t diurnal_peak_s = 32400;

  double requeue_probability = 0.0;
  int max_requeues = 0;

  double payload_supply = 1.0;  // P(claim) per advertise tick while free
  Dist payload_duration{Family::Gamma, {2.0, 0.0, 7200.0}};
  std::int64_t idle_timeout_s = 1200;

  OutageConfig outage;
};

struct SimConfig {
  std::vector<SiteConfig> sites;
  std::int64_t duration_s = 86400;
  std::int64_t snapshot_interval_s = 60;
  std::int64_t advertise_interval_s = 300;
  // Graceful exits (idle shutdown, retirement) push one last state update
  // whose ad lingers this long before the collector drops it; hard kills
  // vanish immediately. Keep it at or above snapshot_interval_s so the
  // final update is actually observable.
  std::int64_t graceful_linger_s = 180;
  std::int64_t start_time = 1600000000;
  std::uint64_t seed = 1;
};

struct TruthRecord {
  PilotKey key;
  std::string instance_name;
  Label true_label = Label::Kill;
  std::int64_t true_event_time = 0;
};

struct SimResult {
  std::vector<TruthRecord> truth;
  std::size_t pilots = 0;
  std::size_t instances = 0;  // instances that started inside the run window
  std::size_t alive_at_end = 0;
  std::size_t ads = 0;
  std::size_t frames = 0;
  std::string snapshot_dir;
  std::string truth_path;
};

inline void validate_config(const SimConfig& cfg) {
  if (cfg.duration_s <= 0) throw InvalidConfig("duration must be positive");
  if (cfg.snapshot_interval_s <= 0 || cfg.advertise_interval_s <= 0)
    throw InvalidConfig("intervals must be positive");
  if (cfg.graceful_linger_s < 0 || cfg.graceful_linger_s > 300)
    throw InvalidConfig("graceful linger must be in [0, 300] seconds");
  if (cfg.sites.empty()) throw InvalidConfig("need at least one site");
  for (const auto& s : cfg.sites) {
    const std::string where = " (site " + s.site + ")";
    if (s.resource_name.empty() || s.site.empty() || s.entry_name.empty())
      throw InvalidConfig("site names must be nonempty" + where);
    if (s.pilot_arrival_rate_per_hour < 0) throw InvalidConfig("negative arrival rate" + where);
    if (s.arrival_window_s < 0) throw InvalidConfig("negative arrival window" + where);
    if (s.offset_jitter_frac < 0 || s.offset_jitter_frac >= 1)
      throw InvalidConfig("offset jitter must be in [0,1)" + where);
    // Deadlines must stay ordered under worst-case jitter.
    const double lo_die = static_cast<double>(s.to_die_offset_s) * (1.0 - s.offset_jitter_frac);
    const double hi_ret =
        static_cast<double>(s.to_retire_offset_s) * (1.0 + s.offset_jitter_frac);
    if (!(s.to_retire_offset_s > 0 && hi_ret < lo_die))
      throw InvalidConfig("to_retire offset must stay below to_die offset under jitter" + where);
    if (s.preemption_hazard_per_hour < 0) throw InvalidConfig("negative hazard" + where);
    if (s.early_burst_multiplier < 0) throw InvalidConfig("negative burst multiplier" + where);
    if (s.early_burst_window_s < 0) throw InvalidConfig("negative burst window" + where);
    if (s.diurnal_amplitude < 0 || s.diurnal_amplitude >= 1)
      throw InvalidConfig("diurnal amplitude must be in [0,1)" + where);
    if (s.requeue_probability < 0 || s.requeue_probability > 1)
      throw InvalidConfig("requeue probability must be in [0,1]" + where);
    if (s.max_requeues < 0) throw InvalidConfig("negative max_requeues" + where);
    if (s.payload_supply < 0 || s.payload_supply > 1)
      throw InvalidConfig("payload supply must be in [0,1]" + where);
    if (s.idle_timeout_s <= 0) throw InvalidConfig("idle timeout must be positive" + where);
    if (s.outage.rate_per_hour < 0) throw InvalidConfig("negative outage rate" + where);
    try {
      validate_dist(s.payload_duration);
      validate_dist(s.outage.duration);
    } catch (const InvalidParams& e) {
      throw InvalidConfig(std::string("bad distribution: ") + e.what() + where);
    }
  }
}

// ---- JSON config I/O -------------------------------------------------------

inline nlohmann::json dist_to_json(const Dist& d) {
  return {{"family", family_name(d.family)}, {"params", d.params}};
}

inline Dist dist_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.contains("params"))
    throw InvalidConfig("distribution needs {family, params}");
  Dist d;
  d.family = family_from_name(j.at("family").get<std::string>());
  d.params = j.at("params").get<std::vector<double>>();
  return d;
}

inline nlohmann::json site_to_json(const SiteConfig& s) {
  nlohmann::json j;
  j["resource_name"] = s.resource_name;
  j["site"] = s.site;
  j["entry_name"] = s.entry_name;
  j["pilot_arrival_rate_per_hour"] = s.pilot_arrival_rate_per_hour;
  j["arrival_window_s"] = s.arrival_window_s;
  j["to_retire_offset_s"] = s.to_retire_offset_s;
  j["to_die_offset_s"] = s.to_die_offset_s;
  j["offset_jitter_frac"] = s.offset_jitter_frac;
  j["preemption_hazard_per_hour"] = s.preemption_hazard_per_hour;
  j["early_burst_multiplier"] = s.early_burst_multiplier;
  j["early_burst_window_s"] = s.early_burst_window_s;
  j["diurnal_amplitude"] = s.diurnal_amplitude;
  j["diurnal_peak_s"] = s.diurnal_peak_s;
  j["requeue_probability"] = s.requeue_probability;
  j["max_requeues"] = s.max_requeues;
  j["payload_supply"] = s.payload_supply;
  j["payload_duration"] = dist_to_json(s.payload_duration);
  j["idle_timeout_s"] = s.idle_timeout_s;
  j["outage_rate_per_hour"] = s.outage.rate_per_hour;
  j["outage_duration"] = dist_to_json(s.outage.duration);
  return j;
}

inline SiteConfig site_from_json(const nlohmann::json& j) {
  SiteConfig s;
  try {
    s.resource_name = j.value("resource_name", s.resource_name);
    s.site = j.value("site", s.site);
    s.entry_name = j.value("entry_name", s.entry_name);
    s.pilot_arrival_rate_per_hour =
        j.value("pilot_arrival_rate_per_hour", s.pilot_arrival_rate_per_hour);
    s.arrival_window_s = j.value("arrival_window_s", s.arrival_window_s);
    s.to_retire_offset_s = j.value("to_retire_offset_s", s.to_retire_offset_s);
    s.to_die_offset_s = j.value("to_die_offset_s", s.to_die_offset_s);
    s.offset_jitter_frac = j.value("offset_jitter_frac", s.offset_jitter_frac);
    s.preemption_hazard_per_hour =
        j.value("preemption_hazard_per_hour", s.preemption_hazard_per_hour);
    s.early_burst_multiplier = j.value("early_burst_multiplier", s.early_burst_multiplier);
    s.early_burst_window_s = j.value("early_burst_window_s", s.early_burst_window_s);
    s.diurnal_amplitude = j.value("diurnal_amplitude", s.diurnal_amplitude);
    s.diurnal_peak_s = j.value("diurnal_peak_s", s.diurnal_peak_s);
    s.requeue_probability = j.value("requeue_probability", s.requeue_probability);
    s.max_requeues = j.value("max_requeues", s.max_requeues);
    s.payload_supply = j.value("payload_supply", s.payload_supply);
    if (j.contains("payload_duration")) s.payload_duration = dist_from_json(j.at("payload_duration"));
    s.idle_timeout_s = j.value("idle_timeout_s", s.idle_timeout_s);
    s.outage.rate_per_hour = j.value("outage_rate_per_hour", s.outage.rate_per_hour);
    if (j.contains("outage_duration")) s.outage.duration = dist_from_json(j.at("outage_duration"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("bad site config: ") + e.what());
  }
  return s;
}

inline nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["duration_s"] = cfg.duration_s;
  j["snapshot_interval_s"] = cfg.snapshot_interval_s;
  j["advertise_interval_s"] = cfg.advertise_interval_s;
  j["graceful_linger_s"] = cfg.graceful_linger_s;
  j["start_time"] = cfg.start_time;
  j["seed"] = cfg.seed;
  j["sites"] = nlohmann::json::array();
  for (const auto& s : cfg.sites) j["sites"].push_back(site_to_json(s));
  return j;
}

inline SimConfig config_from_json(const nlohmann::json& j) {
  SimConfig cfg;
  try {
    cfg.duration_s = j.value("duration_s", cfg.duration_s);
    cfg.snapshot_interval_s = j.value("snapshot_interval_s", cfg.snapshot_interval_s);
    cfg.advertise_interval_s = j.value("advertise_interval_s", cfg.advertise_interval_s);
    cfg.graceful_linger_s = j.value("graceful_linger_s", cfg.graceful_linger_s);
    cfg.start_time = j.value("start_time", cfg.start_time);
    cfg.seed = j.value("seed", cfg.seed);
    if (!j.contains("sites") || !j.at("sites").is_array())
      throw InvalidConfig("config needs a sites array");
    for (const auto& js : j.at("sites")) cfg.sites.push_back(site_from_json(js));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("bad config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

// ---- Simulation internals --------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct AdPoint {
  std::int64_t t;
  AdState state;
  std::int64_t run;  // TotalJobRunTime as of t
};

struct InstanceSim {
  std::size_t site_idx = 0;
  std::string name;
  std::string job_id;
  std::int64_t start = 0;
  std::int64_t to_retire = 0;
  std::int64_t to_die = 0;
  std::int64_t death = 0;  // exact event time; > horizon means alive at end
  Label label = Label::Kill;
  std::vector<AdPoint> points;
  std::vector<std::pair<std::int64_t, std::int64_t>> outages;  // [from, to)

  // Frame-sweep state.
  std::size_t point_cursor = 0;
  std::size_t outage_cursor = 0;
  std::ptrdiff_t last_present_frame = -1;
  bool seen = false;
};

struct Segment {
  std::int64_t from;
  AdState state;
};

inline double exp_gap(std::mt19937_64& rng, double rate_per_s) {
  return -std::log(uniform_unit(rng)) / rate_per_s;
}

// One pilot instance from startup to its own death, ignoring preemption.
// Returns segments and claim intervals; sets death/label.
inline void walk_natural_life(const SiteConfig& site, std::int64_t adv, InstanceSim& inst,
                              std::vector<Segment>& segs,
                              std::vector<std::pair<std::int64_t, std::int64_t>>& claims,
                              std::mt19937_64& rng) {
  segs.push_back({inst.start, AdState::Unclaimed});
  std::int64_t cur = inst.start;            // unclaimed since here
  std::int64_t next_tick = inst.start + adv;
  for (;;) {
    const std::int64_t idle_deadline = cur + site.idle_timeout_s;
    const std::int64_t bound = std::min(idle_deadline, inst.to_retire);
    std::int64_t claimed_at = -1;
    while (next_tick < bound) {
      const std::int64_t t = next_tick;
      next_tick += adv;
      if (uniform_unit(rng) < site.payload_supply) {
        claimed_at = t;
        break;
      }
    }
    if (claimed_at < 0) {
      if (idle_deadline < inst.to_retire) {
        inst.death = idle_deadline;
        inst.label = Label::IdleShutDown;
      } else {
        inst.death = inst.to_retire;
        inst.label = Label::Retire;
      }
      return;
    }
    const double draw = sample(site.payload_duration, rng);
    const std::int64_t dur =
        std::max<std::int64_t>(1, std::llround(std::max(draw, 1.0)));
    const std::int64_t end = claimed_at + dur;
    segs.push_back({claimed_at, AdState::Claimed});
    if (end >= inst.to_die) {
      claims.push_back({claimed_at, inst.to_die});
      segs.push_back({inst.to_retire, AdState::Retiring});
      inst.death = inst.to_die;
      inst.label = Label::Kill;
      return;
    }
    if (end >= inst.to_retire) {
      claims.push_back({claimed_at, end});
      if (inst.to_retire < end) segs.push_back({inst.to_retire, AdState::Retiring});
      inst.death = end;
      inst.label = Label::Retire;
      return;
    }
    claims.push_back({claimed_at, end});
    segs.push_back({end, AdState::Unclaimed});
    cur = end;
    // Next claim roll happens at the first tick at or after the payload end.
    if (next_tick < end) {
      const std::int64_t k = (end - inst.start + adv - 1) / adv;
      next_tick = inst.start + k * adv;
    }
  }
}

// Thinned nonhomogeneous Poisson draw for the first preemption time in
// [start, before). Returns -1 when none fires.
inline std::int64_t draw_preemption(const SiteConfig& site, std::int64_t start,
                                    std::int64_t before, std::mt19937_64& rng) {
  if (site.preemption_hazard_per_hour <= 0.0) return -1;
  const double base = site.preemption_hazard_per_hour / 3600.0;
  const double lam_max =
      base * std::max(site.early_burst_multiplier, 1.0) * (1.0 + site.diurnal_amplitude);
  double t = static_cast<double>(start);
  constexpr double kTwoPi = 6.283185307179586;
  for (;;) {
    t += exp_gap(rng, lam_max);
    if (t >= static_cast<double>(before)) return -1;
    double rate = base;
    if (t - static_cast<double>(start) < static_cast<double>(site.early_burst_window_s))
      rate *= site.early_burst_multiplier;
    if (site.diurnal_amplitude > 0.0) {
      const double day_phase =
          std::fmod(t, 86400.0) - static_cast<double>(site.diurnal_peak_s);
      rate *= 1.0 + site.diurnal_amplitude * std::cos(kTwoPi * day_phase / 86400.0);
    }
    if (uniform_unit(rng) * lam_max < rate) {
      const auto tp = static_cast<std::int64_t>(std::ceil(t));
      if (tp <= start) continue;
      return tp < before ? tp : -1;
    }
  }
}

// Advertise points on the tick grid plus state-transition refreshes.
inline void build_points(const InstanceSim& meta, std::int64_t adv,
                         const std::vector<Segment>& segs,
                         const std::vector<std::pair<std::int64_t, std::int64_t>>& claims,
                         std::vector<AdPoint>& out) {
  std::vector<std::int64_t> times;
  const std::int64_t life = meta.death - meta.start;
  times.reserve(static_cast<std::size_t>(life / adv) + segs.size() + 2);
  for (std::int64_t t = meta.start; t < meta.death; t += adv) times.push_back(t);
  for (const auto& s : segs)
    if (s.from < meta.death) times.push_back(s.from);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::size_t si = 0;
  std::size_t ci = 0;
  std::int64_t run_done = 0;
  out.reserve(times.size());
  for (std::int64_t p : times) {
    while (si + 1 < segs.size() && segs[si + 1].from <= p) ++si;
    while (ci < claims.size() && claims[ci].second <= p) {
      run_done += claims[ci].second - claims[ci].first;
      ++ci;
    }
    std::int64_t run = run_done;
    if (ci < claims.size() && claims[ci].first <= p) run += p - claims[ci].first;
    out.push_back({p, segs[si].state, run});
  }
}

inline void draw_outages(const SiteConfig& site, InstanceSim& inst, std::mt19937_64& rng) {
  if (site.outage.rate_per_hour <= 0.0) return;
  const double rate = site.outage.rate_per_hour / 3600.0;
  double t = static_cast<double>(inst.start);
  for (;;) {
    t += exp_gap(rng, rate);
    auto o_start = static_cast<std::int64_t>(std::ceil(t));
    if (o_start >= inst.death) return;
    const std::int64_t dur = std::max<std::int64_t>(
        60, std::llround(std::max(sample(site.outage.duration, rng), 60.0)));
    const std::int64_t o_end = std::min(o_start + dur, inst.death);
    inst.outages.push_back({o_start, o_end});
    t = static_cast<double>(o_end);
  }
}

}  // namespace detail

inline SimResult run_simulation(const SimConfig& cfg, const std::string& out_dir) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  const std::int64_t horizon = cfg.start_time + cfg.duration_s;
  SimResult result;
  result.snapshot_dir = out_dir;

  std::vector<detail::InstanceSim> instances;
  std::vector<detail::Segment> segs;
  std::vector<std::pair<std::int64_t, std::int64_t>> claims;

  for (std::size_t si = 0; si < cfg.sites.size(); ++si) {
    const SiteConfig& site = cfg.sites[si];
    if (site.pilot_arrival_rate_per_hour <= 0.0) continue;
    const std::int64_t window =
        site.arrival_window_s > 0 ? std::min(site.arrival_window_s, cfg.duration_s)
                                  : cfg.duration_s;
    std::mt19937_64 arrival_rng(
        detail::splitmix64(cfg.seed ^ detail::splitmix64(0xA221 + si)));
    const double rate = site.pilot_arrival_rate_per_hour / 3600.0;

    double at = detail::exp_gap(arrival_rng, rate);
    for (std::uint64_t ordinal = 0; at < static_cast<double>(window);
         at += detail::exp_gap(arrival_rng, rate), ++ordinal) {
      const auto arrival = cfg.start_time + static_cast<std::int64_t>(at);
      std::mt19937_64 rng(detail::splitmix64(
          detail::splitmix64(cfg.seed + 0x51 * (si + 1)) ^ (ordinal + 1)));
      ++result.pilots;
      const std::string job_id = std::to_string(1000 + ordinal) + ".0";

      std::int64_t start = arrival;
      for (int restart = 0;; ++restart) {
        detail::InstanceSim inst;
        inst.site_idx = si;
        inst.job_id = job_id;
        inst.name = "glidein_" + std::to_string(si + 1) + "_" + std::to_string(ordinal + 1) +
                    "_" + std::to_string(restart) + "@node" + std::to_string(ordinal + 1) +
                    "." + site.entry_name;
        inst.start = start;
        const double jr = 2.0 * uniform_unit(rng) - 1.0;
        const double jd = 2.0 * uniform_unit(rng) - 1.0;
        inst.to_retire = start + std::llround(static_cast<double>(site.to_retire_offset_s) *
                                              (1.0 + site.offset_jitter_frac * jr));
        inst.to_die = start + std::llround(static_cast<double>(site.to_die_offset_s) *
                                           (1.0 + site.offset_jitter_frac * jd));

        segs.clear();
        claims.clear();
        detail::walk_natural_life(site, cfg.advertise_interval_s, inst, segs, claims, rng);

        // A same-second preemption loses to the natural death, matching the
        // classifier's rule precedence.
        const std::int64_t tp = detail::draw_preemption(site, inst.start, inst.death, rng);
        if (tp > 0) {
          inst.death = tp;
          inst.label = Label::Preemption;
          while (!segs.empty() && segs.back().from >= tp) segs.pop_back();
          while (!claims.empty() && claims.back().first >= tp) claims.pop_back();
          if (!claims.empty() && claims.back().second > tp) claims.back().second = tp;
        }

        detail::build_points(inst, cfg.advertise_interval_s, segs, claims, inst.points);

        // Graceful exits report once more at the decision instant; the ad
        // lingers briefly (dropped invalidations), so the final state and a
        // daemon clock equal to the logical stop time are observable. Hard
        // deaths (kill, preemption) vanish without a trace.
        const std::int64_t logical_death = inst.death;
        if ((inst.label == Label::IdleShutDown || inst.label == Label::Retire) &&
            cfg.graceful_linger_s > 0) {
          std::int64_t run_at = 0;
          for (const auto& c : claims) run_at += std::min(c.second, logical_death) - c.first;
          const AdState exit_state =
              inst.label == Label::Retire ? AdState::Retiring : AdState::Unclaimed;
          inst.points.push_back({logical_death, exit_state, run_at});
          inst.death = std::min(logical_death + cfg.graceful_linger_s, inst.to_die);
        }

        detail::draw_outages(site, inst, rng);

        const bool preempted = inst.label == Label::Preemption;
        const std::int64_t death = logical_death;
        if (inst.start <= horizon) {
          ++result.instances;
          if (death > horizon)
            ++result.alive_at_end;
          else
            result.truth.push_back(
                {PilotKey{job_id, site.entry_name}, inst.name, inst.label, death});
          instances.push_back(std::move(inst));
        }

        if (death > horizon || !preempted) break;
        if (restart >= site.max_requeues) break;
        if (uniform_unit(rng) >= site.requeue_probability) break;
        const auto delay =
            60 + static_cast<std::int64_t>(uniform_unit(rng) * 841.0);
        start = death + delay;
        if (start > horizon) break;
      }
    }
  }

  // Frame sweep. Instances enter in start order; within a frame, ads appear
  // in (start, creation order), which is deterministic.
  std::vector<std::size_t> by_start(instances.size());
  for (std::size_t i = 0; i < by_start.size(); ++i) by_start[i] = i;
  std::stable_sort(by_start.begin(), by_start.end(), [&](std::size_t a, std::size_t b) {
    return instances[a].start < instances[b].start;
  });

  std::vector<std::int64_t> frame_times;
  for (std::int64_t t = cfg.start_time; t <= horizon; t += cfg.snapshot_interval_s)
    frame_times.push_back(t);
  result.frames = frame_times.size();

  std::vector<std::size_t> active;
  std::size_t next_inst = 0;
  std::string line_buf;
  for (std::size_t fi = 0; fi < frame_times.size(); ++fi) {
    const std::int64_t ft = frame_times[fi];
    while (next_inst < by_start.size() && instances[by_start[next_inst]].start <= ft)
      active.push_back(by_start[next_inst++]);

    const std::string path = out_dir + "/snapshot_" + std::to_string(ft) + ".jsonl";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);

    for (std::size_t idx : active) {
      detail::InstanceSim& inst = instances[idx];
      if (ft >= inst.death) continue;
      while (inst.point_cursor + 1 < inst.points.size() &&
             inst.points[inst.point_cursor + 1].t <= ft)
        ++inst.point_cursor;
      while (inst.outage_cursor < inst.outages.size() &&
             inst.outages[inst.outage_cursor].second <= ft)
        ++inst.outage_cursor;
      if (inst.outage_cursor < inst.outages.size() &&
          inst.outages[inst.outage_cursor].first <= ft)
        continue;  // hidden by an outage

      if (inst.seen && inst.last_present_frame < static_cast<std::ptrdiff_t>(fi) - 1) {
        // Came back after missing at least one frame: that is an observable
        // network gap, recorded with the frame time right after the last
        // sighting (the classifier pins gap events the same way).
        result.truth.push_back(
            {PilotKey{inst.job_id, cfg.sites[inst.site_idx].entry_name}, inst.name,
             Label::NetworkIssue,
             frame_times[static_cast<std::size_t>(inst.last_present_frame) + 1]});
      }
      inst.seen = true;
      inst.last_present_frame = static_cast<std::ptrdiff_t>(fi);

      const detail::AdPoint& pt = inst.points[inst.point_cursor];
      const SiteConfig& site = cfg.sites[inst.site_idx];
      PilotAd ad;
      ad.name = inst.name;
      ad.state = pt.state;
      ad.activity = pt.state == AdState::Unclaimed ? "Idle" : "Busy";
      ad.my_current_time = pt.t;
      ad.total_job_run_time = pt.run;
      ad.daemon_start_time = inst.start;
      ad.to_retire = inst.to_retire;
      ad.to_die = inst.to_die;
      ad.site = site.site;
      ad.entry_name = site.entry_name;
      ad.resource_name = site.resource_name;
      ad.site_wms_job_id = inst.job_id;
      line_buf = ad_to_jsonl(ad);
      line_buf.push_back('\n');
      out.write(line_buf.data(), static_cast<std::streamsize>(line_buf.size()));
      ++result.ads;
    }

    // Drop dead instances so the active set stays small.
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](std::size_t idx) { return instances[idx].death <= ft; }),
                 active.end());
  }

  std::sort(result.truth.begin(), result.truth.end(),
            [](const TruthRecord& a, const TruthRecord& b) {
              if (a.true_event_time != b.true_event_time)
                return a.true_event_time < b.true_event_time;
              if (a.key != b.key) return a.key < b.key;
              return a.instance_name < b.instance_name;
            });

  result.truth_path = out_dir + "/truth.csv";
  CsvWriter truth_csv(result.truth_path,
                      {"GLIDEIN_SITEWMS_JobId", "GLIDEIN_Entry_Name", "Name", "true_label",
                       "true_event_time"});
  for (const auto& r : result.truth)
    truth_csv.row({r.key.site_wms_job_id, r.key.entry_name, r.instance_name,
                   label_name(r.true_label), fmt_i64(r.true_event_time)});

  log_info("simulate: %zu pilots, %zu instances, %zu ads over %zu frames, %zu truth rows",
           result.pilots, result.instances, result.ads, result.frames,
           result.truth.size());
  return result;
}

// Bundled four-site scenario, hand-calibrated so a full pipeline run lands
// near the production label mix this tool was built around: roughly half
// retirements, a third preemptions, a tenth idle shutdowns, ~1.3% network
// gaps, the rest hard kills. One cluster ("campus-burst") concentrates its
// preemption hazard in the first hour of instance life.
inline SimConfig emit_paper_shaped_scenario() {
  SimConfig cfg;
  cfg.duration_s = 72 * 3600;
  cfg.snapshot_interval_s = 300;
  cfg.advertise_interval_s = 300;
  cfg.graceful_linger_s = 300;
  cfg.start_time = 1600000000;
  cfg.seed = 20160901;

  // Arrivals stop 27 h before the end; the longest natural life is ~23.3 h,
  // so nearly every pilot finishes inside the observation window.
  const std::int64_t window = 45 * 3600;

  SiteConfig bulk;
  bulk.resource_name = "grid-prod-a";
  bulk.site = "ProdA";
  bulk.entry_name = "entry_prod_a";
  bulk.pilot_arrival_rate_per_hour = 160.0;
  bulk.arrival_window_s = window;
  bulk.payload_supply = 0.60;
  bulk.payload_duration = {Family::Gamma, {1.35, 0.0, 16200.0}};
  bulk.preemption_hazard_per_hour = 0.0145;
  bulk.early_burst_multiplier = 2.0;
  bulk.diurnal_amplitude = 0.3;
  bulk.requeue_probability = 0.35;
  bulk.max_requeues = 5;
  bulk.outage.rate_per_hour = 0.0013;

  SiteConfig burst;
  burst.resource_name = "campus-burst";
  burst.site = "CampusB";
  burst.entry_name = "entry_campus_b";
  burst.pilot_arrival_rate_per_hour = 20.0;
  burst.arrival_window_s = window;
  burst.payload_supply = 0.65;
  burst.payload_duration = {Family::Gamma, {2.0, 0.0, 5400.0}};
  burst.preemption_hazard_per_hour = 0.03;
  burst.early_burst_multiplier = 40.0;
  burst.early_burst_window_s = 3600;
  burst.diurnal_amplitude = 0.2;
  burst.requeue_probability = 0.5;
  burst.max_requeues = 20;
  burst.outage.rate_per_hour = 0.0012;

  SiteConfig scavenge;
  scavenge.resource_name = "scavenge-pool";
  scavenge.site = "ScavengeC";
  scavenge.entry_name = "entry_scavenge_c";
  scavenge.pilot_arrival_rate_per_hour = 40.0;
  scavenge.arrival_window_s = window;
  scavenge.payload_supply = 0.62;
  scavenge.payload_duration = {Family::Gamma, {1.8, 0.0, 7200.0}};
  scavenge.preemption_hazard_per_hour = 0.05;
  scavenge.diurnal_amplitude = 0.4;
  scavenge.requeue_probability = 0.0;
  scavenge.outage.rate_per_hour = 0.0012;

  SiteConfig edu;
  edu.resource_name = "edu-small";
  edu.site = "EduD";
  edu.entry_name = "entry_edu_d";
  edu.pilot_arrival_rate_per_hour = 25.0;
  edu.arrival_window_s = window;
  edu.payload_supply = 0.60;
  edu.payload_duration = {Family::Gamma, {2.0, 0.0, 5400.0}};
  edu.preemption_hazard_per_hour = 0.0;
  edu.outage.rate_per_hour = 0.0012;

  cfg.sites = {bulk, burst, scavenge, edu};
  return cfg;
}

struct TruthTable {
  // Keyed by (job id, entry, instance name); gap records are kept separately
  // since one instance can have several.
  std::map<std::tuple<std::string, std::string, std::string>, TruthRecord> terminations;
  std::vector<TruthRecord> gaps;
};

inline TruthTable read_truth_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const std::vector<std::string> want = {"GLIDEIN_SITEWMS_JobId", "GLIDEIN_Entry_Name",
                                         "Name", "true_label", "true_event_time"};
  if (t.header != want) throw CsvError("unexpected truth.csv header in " + path);
  TruthTable table;
  for (const auto& row : t.rows) {
    TruthRecord r;
    r.key = PilotKey{row[0], row[1]};
    r.instance_name = row[2];
    r.true_label = label_from_name(row[3]);
    r.true_event_time = std::stoll(row[4]);
    if (r.true_label == Label::NetworkIssue)
      table.gaps.push_back(r);
    else
      table.terminations.emplace(std::make_tuple(row[0], row[1], row[2]), r);
  }
  return table;
}

}  // namespace gridscope
