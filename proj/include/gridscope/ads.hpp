#pragma once

// Pilot ad data model. One PilotAd is one collector record for one startd
// at one instant; a SnapshotFrame is everything the collector held at a
// snapshot timestamp. Attribute names on the wire follow the glidein
// convention (GLIDEIN_* plus the usual startd attributes).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridscope/errors.hpp"

namespace gridscope {

enum class AdState { Unclaimed, Claimed, Retiring, Other };

inline AdState parse_ad_state(const std::string& s) {
  if (s == "Unclaimed") return AdState::Unclaimed;
  if (s == "Claimed") return AdState::Claimed;
  if (s == "Retiring") return AdState::Retiring;
  return AdState::Other;
}

inline const char* ad_state_name(AdState s) {
  switch (s) {
    case AdState::Unclaimed: return "Unclaimed";
    case AdState::Claimed: return "Claimed";
    case AdState::Retiring: return "Retiring";
    default: return "Other";
  }
}

// Identity of a pilot *job* across preemptions and restarts. The batch
// system job id alone repeats across sites, so the entry name is part of
// the key.
struct PilotKey {
  std::string site_wms_job_id;
  std::string entry_name;

  friend auto operator<=>(const PilotKey&, const PilotKey&) = default;

  std::string display() const { return site_wms_job_id + "/" + entry_name; }
};

struct PilotAd {
  std::string name;             // startd Name; changes on every restart
  AdState state = AdState::Other;
  std::string state_raw;        // wire value, preserved for Other states
  std::string activity;
  std::int64_t my_current_time = 0;
  std::int64_t total_job_run_time = 0;
  std::int64_t daemon_start_time = 0;
  std::int64_t to_retire = 0;   // GLIDEIN_ToRetire, absolute epoch seconds
  std::int64_t to_die = 0;      // GLIDEIN_ToDie, absolute epoch seconds
  std::string site;
  std::string entry_name;
  std::string resource_name;
  std::string site_wms_job_id;

  PilotKey key() const { return PilotKey{site_wms_job_id, entry_name}; }

  const std::string& state_name() const {
    if (state == AdState::Other && !state_raw.empty()) return state_raw;
    static const std::string names[] = {"Unclaimed", "Claimed", "Retiring", "Other"};
    return names[static_cast<int>(state)];
  }
};

struct SnapshotFrame {
  std::int64_t frame_time = 0;
  std::vector<PilotAd> ads;
};

namespace detail {

inline std::int64_t require_int(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedAd(std::string("missing attribute ") + key);
  if (!it->is_number_integer())
    throw MalformedAd(std::string("attribute ") + key + " is not an integer");
  return it->get<std::int64_t>();
}

inline std::string require_str(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedAd(std::string("missing attribute ") + key);
  if (!it->is_string())
    throw MalformedAd(std::string("attribute ") + key + " is not a string");
  return it->get<std::string>();
}

}  // namespace detail

// Strict parse of one collector record. Throws MalformedAd with a reason
// suitable for the quarantine report.
inline PilotAd ad_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw MalformedAd("record is not a JSON object");
  PilotAd ad;
  ad.name = detail::require_str(j, "Name");
  ad.state_raw = detail::require_str(j, "State");
  ad.state = parse_ad_state(ad.state_raw);
  ad.activity = detail::require_str(j, "Activity");
  ad.my_current_time = detail::require_int(j, "MyCurrentTime");
  ad.total_job_run_time = detail::require_int(j, "TotalJobRunTime");
  ad.daemon_start_time = detail::require_int(j, "DaemonStartTime");
  ad.to_retire = detail::require_int(j, "GLIDEIN_ToRetire");
  ad.to_die = detail::require_int(j, "GLIDEIN_ToDie");
  ad.site = detail::require_str(j, "GLIDEIN_Site");
  ad.entry_name = detail::require_str(j, "GLIDEIN_Entry_Name");
  ad.resource_name = detail::require_str(j, "GLIDEIN_ResourceName");
  ad.site_wms_job_id = detail::require_str(j, "GLIDEIN_SITEWMS_JobId");

  if (ad.daemon_start_time > ad.my_current_time)
    throw MalformedAd("DaemonStartTime exceeds MyCurrentTime");
  if (ad.to_retire > ad.to_die)
    throw MalformedAd("to_retire <= to_die violated");
  if (ad.site_wms_job_id.empty())
    throw MalformedAd("GLIDEIN_SITEWMS_JobId is empty");
  if (ad.entry_name.empty())
    throw MalformedAd("GLIDEIN_Entry_Name is empty");
  return ad;
}

inline nlohmann::json ad_to_json(const PilotAd& ad) {
  nlohmann::json j;
  j["Name"] = ad.name;
  j["State"] = ad.state_name();
  j["Activity"] = ad.activity;
  j["MyCurrentTime"] = ad.my_current_time;
  j["TotalJobRunTime"] = ad.total_job_run_time;
  j["DaemonStartTime"] = ad.daemon_start_time;
  j["GLIDEIN_ToRetire"] = ad.to_retire;
  j["GLIDEIN_ToDie"] = ad.to_die;
  j["GLIDEIN_Site"] = ad.site;
  j["GLIDEIN_Entry_Name"] = ad.entry_name;
  j["GLIDEIN_ResourceName"] = ad.resource_name;
  j["GLIDEIN_SITEWMS_JobId"] = ad.site_wms_job_id;
  return j;
}

inline std::string ad_to_jsonl(const PilotAd& ad) { return ad_to_json(ad).dump(); }

struct PilotKeyHash {
  std::size_t operator()(const PilotKey& k) const {
    // FNV-1a over both parts; the separator keeps ("ab","c") != ("a","bc").
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= 0x1f;
      h *= 1099511628211ull;
    };
    mix(k.site_wms_job_id);
    mix(k.entry_name);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace gridscope
