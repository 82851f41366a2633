#pragma once

// Descriptive statistics over classified termination events: label mix,
// event rate over time, per-cluster breakdowns, duration CDFs, preemption
// chains, and the retirement/death configuration histograms. A "cluster"
// here is one GLIDEIN_ResourceName.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gridscope/classify.hpp"
#include "gridscope/csv.hpp"
#include "gridscope/errors.hpp"

namespace gridscope {

// Right-continuous empirical CDF: F(x) = #{samples <= x} / n.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    if (sorted_.empty()) return 0.0;
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  std::size_t size() const { return sorted_.size(); }
  bool empty() const { return sorted_.empty(); }
  const std::vector<double>& sorted_samples() const { return sorted_; }

  // Distinct sample values with their cumulative probability; the natural
  // rows for a CDF file.
  std::vector<std::pair<double, double>> steps() const {
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
      out.emplace_back(sorted_[i], static_cast<double>(i + 1) / n);
    }
    return out;
  }

 private:
  std::vector<double> sorted_;
};

struct TimeBin {
  std::int64_t bin_start = 0;
  std::size_t total = 0;
  std::array<std::size_t, 5> by_label{};
};

// Histogram of event times in fixed-width bins aligned to the first event.
inline std::vector<TimeBin> events_over_time(const std::vector<TerminationEvent>& events,
                                             std::int64_t bin_width_s = 3600) {
  if (events.empty()) throw EmptyInput("no events to bin");
  if (bin_width_s <= 0) throw InvalidConfig("bin width must be positive");
  std::int64_t t0 = events.front().event_time;
  std::int64_t t1 = t0;
  for (const auto& ev : events) {
    t0 = std::min(t0, ev.event_time);
    t1 = std::max(t1, ev.event_time);
  }
  const std::size_t nbins = static_cast<std::size_t>((t1 - t0) / bin_width_s) + 1;
  std::vector<TimeBin> bins(nbins);
  for (std::size_t b = 0; b < nbins; ++b)
    bins[b].bin_start = t0 + static_cast<std::int64_t>(b) * bin_width_s;
  for (const auto& ev : events) {
    auto& bin = bins[static_cast<std::size_t>((ev.event_time - t0) / bin_width_s)];
    bin.total++;
    bin.by_label[static_cast<std::size_t>(ev.label)]++;
  }
  return bins;
}

struct ClusterCount {
  std::string cluster;
  std::size_t total = 0;
  std::array<std::size_t, 5> by_label{};
  std::size_t pilots = 0;
};

// Per-cluster event counts, descending; ties break on the cluster name so
// the order (and any de-identified aliases) are reproducible.
inline std::vector<ClusterCount> per_cluster_counts(
    const std::vector<TerminationEvent>& events) {
  std::map<std::string, ClusterCount> by_cluster;
  std::map<std::string, std::set<PilotKey>> pilots;
  for (const auto& ev : events) {
    ClusterCount& c = by_cluster[ev.resource_name];
    c.cluster = ev.resource_name;
    c.total++;
    c.by_label[static_cast<std::size_t>(ev.label)]++;
    pilots[ev.resource_name].insert(ev.key);
  }
  std::vector<ClusterCount> out;
  out.reserve(by_cluster.size());
  for (auto& [name, c] : by_cluster) {
    c.pilots = pilots[name].size();
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const ClusterCount& a, const ClusterCount& b) {
    if (a.total != b.total) return a.total > b.total;
    return a.cluster < b.cluster;
  });
  return out;
}

// Stable alias map: biggest cluster becomes C0.
inline std::map<std::string, std::string> deidentify_clusters(
    const std::vector<ClusterCount>& counts) {
  std::map<std::string, std::string> alias;
  for (std::size_t i = 0; i < counts.size(); ++i)
    alias[counts[i].cluster] = "C" + std::to_string(i);
  return alias;
}

inline EmpiricalCdf duration_cdf(const std::vector<TerminationEvent>& events, Label label) {
  std::vector<double> samples;
  for (const auto& ev : events)
    if (ev.label == label) samples.push_back(static_cast<double>(ev.instance_runtime));
  return EmpiricalCdf(std::move(samples));
}

struct PreemptionChain {
  std::size_t total_pilots = 0;      // pilots with any event at all
  std::vector<std::size_t> n;        // n[k-1] = pilots preempted at least k times
  std::vector<double> ratio;         // n_k / total_pilots
  std::vector<double> conditional;   // n_{k+1} / n_k, one entry shorter

  std::size_t at_least(std::size_t k) const {
    return k == 0 || k > n.size() ? (k == 0 ? total_pilots : 0) : n[k - 1];
  }
};

inline PreemptionChain preemption_chain(const std::vector<TerminationEvent>& events) {
  if (events.empty()) throw EmptyInput("no events for chain analysis");
  std::map<PilotKey, std::size_t> preempts;
  std::set<PilotKey> pilots;
  std::size_t max_count = 0;
  for (const auto& ev : events) {
    pilots.insert(ev.key);
    if (ev.label == Label::Preemption) {
      std::size_t c = ++preempts[ev.key];
      max_count = std::max(max_count, c);
    }
  }
  PreemptionChain chain;
  chain.total_pilots = pilots.size();
  chain.n.assign(max_count, 0);
  for (const auto& [key, count] : preempts)
    for (std::size_t k = 1; k <= count; ++k) chain.n[k - 1]++;
  for (std::size_t k = 0; k < chain.n.size(); ++k) {
    chain.ratio.push_back(static_cast<double>(chain.n[k]) /
                          static_cast<double>(chain.total_pilots));
    if (k + 1 < chain.n.size())
      chain.conditional.push_back(static_cast<double>(chain.n[k + 1]) /
                                  static_cast<double>(chain.n[k]));
  }
  return chain;
}

inline EmpiricalCdf time_to_preemption_cdf(const std::vector<TerminationEvent>& events,
                                           const std::string& cluster) {
  std::vector<double> samples;
  for (const auto& ev : events)
    if (ev.label == Label::Preemption && ev.resource_name == cluster)
      samples.push_back(static_cast<double>(ev.instance_runtime));
  return EmpiricalCdf(std::move(samples));
}

struct TaxonomyOptions {
  std::size_t min_pilots = 100;          // smaller clusters are not categorized
  double preempt_rate_floor = 0.01;      // below this: NoPreempt
  double requeue_fraction_split = 0.5;   // at/above: Requeue, below: Destructive
};

struct ClusterCategory {
  std::string cluster;
  std::size_t pilots = 0;
  std::size_t events = 0;
  std::size_t preemptions = 0;
  std::size_t requeued = 0;
  double preempt_rate = 0;
  double requeue_fraction = 0;
  std::string category;  // NoPreempt | Requeue | Destructive
};

inline std::vector<ClusterCategory> cluster_taxonomy(
    const std::vector<TerminationEvent>& events, const TaxonomyOptions& opt = {}) {
  auto counts = per_cluster_counts(events);
  std::map<std::string, std::pair<std::size_t, std::size_t>> preempt_info;  // (all, requeued)
  for (const auto& ev : events) {
    if (ev.label != Label::Preemption) continue;
    auto& info = preempt_info[ev.resource_name];
    info.first++;
    if (ev.evidence.rfind("requeued", 0) == 0) info.second++;
  }
  std::vector<ClusterCategory> out;
  for (const auto& c : counts) {
    if (c.pilots < opt.min_pilots) continue;
    ClusterCategory cat;
    cat.cluster = c.cluster;
    cat.pilots = c.pilots;
    cat.events = c.total;
    auto it = preempt_info.find(c.cluster);
    if (it != preempt_info.end()) {
      cat.preemptions = it->second.first;
      cat.requeued = it->second.second;
    }
    cat.preempt_rate = static_cast<double>(cat.preemptions) / static_cast<double>(cat.events);
    cat.requeue_fraction =
        cat.preemptions == 0
            ? 0.0
            : static_cast<double>(cat.requeued) / static_cast<double>(cat.preemptions);
    if (cat.preempt_rate < opt.preempt_rate_floor)
      cat.category = "NoPreempt";
    else if (cat.requeue_fraction >= opt.requeue_fraction_split)
      cat.category = "Requeue";
    else
      cat.category = "Destructive";
    out.push_back(std::move(cat));
  }
  return out;
}

struct Histogram {
  double bin_width = 0.5;
  std::int64_t first_bin = 0;              // index of the leftmost bin
  std::vector<std::size_t> counts;         // contiguous, may contain zeros

  double bin_left(std::size_t i) const {
    return (static_cast<double>(first_bin) + static_cast<double>(i)) * bin_width;
  }
  // Left edge of the most populated bin (first one on ties).
  double mode_bin_left() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i)
      if (counts[i] > counts[best]) best = i;
    return bin_left(best);
  }
};

inline Histogram build_histogram(const std::vector<double>& values, double bin_width) {
  if (values.empty()) throw EmptyInput("no values to histogram");
  if (bin_width <= 0) throw InvalidConfig("bin width must be positive");
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  std::vector<std::int64_t> bins;
  bins.reserve(values.size());
  for (double v : values) {
    const auto b = static_cast<std::int64_t>(std::floor(v / bin_width));
    bins.push_back(b);
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  Histogram h;
  h.bin_width = bin_width;
  h.first_bin = lo;
  h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (std::int64_t b : bins) h.counts[static_cast<std::size_t>(b - lo)]++;
  return h;
}

struct ConfigHistograms {
  Histogram to_retire_hours;
  Histogram to_die_hours;
};

// Distribution of the configured retirement/death offsets, in hours from
// pilot start. The daemon start is reconstructed as event_time minus the
// observed runtime; that is late by at most one frame plus ad staleness,
// far below the half-hour bin.
inline ConfigHistograms config_histograms(const std::vector<TerminationEvent>& events,
                                          double bin_width_hours = 0.5) {
  if (events.empty()) throw EmptyInput("no events for config histograms");
  std::vector<double> retire_h;
  std::vector<double> die_h;
  retire_h.reserve(events.size());
  die_h.reserve(events.size());
  for (const auto& ev : events) {
    const double start = static_cast<double>(ev.event_time - ev.instance_runtime);
    retire_h.push_back((static_cast<double>(ev.to_retire) - start) / 3600.0);
    die_h.push_back((static_cast<double>(ev.to_die) - start) / 3600.0);
  }
  return {build_histogram(retire_h, bin_width_hours),
          build_histogram(die_h, bin_width_hours)};
}

struct StatsOptions {
  bool deidentify = false;
  std::int64_t bin_width_s = 3600;
  std::size_t max_ttp_clusters = 10;
  TaxonomyOptions taxonomy;
};

namespace detail {

inline std::string safe_filename(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

}  // namespace detail

// Writes the whole stats bundle; returns the paths written (for manifests).
inline std::vector<std::filesystem::path> write_stats_csvs(
    const std::vector<TerminationEvent>& events, const std::filesystem::path& out_dir,
    const StatsOptions& opt = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto add = [&written](const fs::path& p) {
    written.push_back(p);
    return p;
  };

  const LabelSummary summary = summarize_labels(events);
  {
    CsvWriter w(add(out_dir / "class_mix.csv"), {"label", "count", "fraction"});
    for (Label l : kAllLabels)
      w.row({label_name(l), fmt_i64(static_cast<std::int64_t>(summary.count(l))),
             fmt_double(summary.fraction(l), 6)});
  }
  {
    CsvWriter w(add(out_dir / "counts.csv"),
                {"events", "distinct_pilots", "distinct_instances", "censored_lookahead"});
    w.row({fmt_i64(static_cast<std::int64_t>(summary.total)),
           fmt_i64(static_cast<std::int64_t>(summary.distinct_pilots)),
           fmt_i64(static_cast<std::int64_t>(summary.distinct_instances)),
           fmt_i64(static_cast<std::int64_t>(summary.censored_lookahead))});
  }
  {
    CsvWriter w(add(out_dir / "events_over_time.csv"),
                {"bin_start", "total", "Retire", "Kill", "IdleShutDown", "Preemption",
                 "NetworkIssue"});
    for (const TimeBin& b : events_over_time(events, opt.bin_width_s)) {
      std::vector<std::string> row = {fmt_i64(b.bin_start),
                                      fmt_i64(static_cast<std::int64_t>(b.total))};
      for (Label l : kAllLabels)
        row.push_back(fmt_i64(static_cast<std::int64_t>(
            b.by_label[static_cast<std::size_t>(l)])));
      w.row(row);
    }
  }

  const auto clusters = per_cluster_counts(events);
  std::map<std::string, std::string> alias;
  if (opt.deidentify) alias = deidentify_clusters(clusters);
  auto cluster_name = [&](const std::string& name) {
    if (!opt.deidentify) return name;
    return alias.at(name);
  };
  {
    CsvWriter w(add(out_dir / "cluster_counts.csv"),
                {"cluster", "pilots", "total", "Retire", "Kill", "IdleShutDown",
                 "Preemption", "NetworkIssue"});
    for (const ClusterCount& c : clusters) {
      std::vector<std::string> row = {cluster_name(c.cluster),
                                      fmt_i64(static_cast<std::int64_t>(c.pilots)),
                                      fmt_i64(static_cast<std::int64_t>(c.total))};
      for (Label l : kAllLabels)
        row.push_back(fmt_i64(static_cast<std::int64_t>(
            c.by_label[static_cast<std::size_t>(l)])));
      w.row(row);
    }
  }

  for (Label l : kAllLabels) {
    EmpiricalCdf cdf = duration_cdf(events, l);
    if (cdf.empty()) continue;
    CsvWriter w(add(out_dir / (std::string("duration_cdf_") + label_name(l) + ".csv")),
                {"runtime_s", "cdf"});
    for (const auto& [x, p] : cdf.steps()) w.row({fmt_double(x, 0), fmt_double(p, 9)});
  }

  {
    const PreemptionChain chain = preemption_chain(events);
    CsvWriter w(add(out_dir / "chain.csv"), {"k", "n_k", "ratio_k", "conditional_k"});
    for (std::size_t k = 0; k < chain.n.size(); ++k)
      w.row({fmt_i64(static_cast<std::int64_t>(k + 1)),
             fmt_i64(static_cast<std::int64_t>(chain.n[k])), fmt_double(chain.ratio[k], 9),
             k < chain.conditional.size() ? fmt_double(chain.conditional[k], 9) : ""});
  }

  {
    std::vector<const ClusterCount*> by_preempt;
    for (const ClusterCount& c : clusters)
      if (c.by_label[static_cast<std::size_t>(Label::Preemption)] > 0)
        by_preempt.push_back(&c);
    std::sort(by_preempt.begin(), by_preempt.end(),
              [](const ClusterCount* a, const ClusterCount* b) {
                const auto pa = a->by_label[static_cast<std::size_t>(Label::Preemption)];
                const auto pb = b->by_label[static_cast<std::size_t>(Label::Preemption)];
                if (pa != pb) return pa > pb;
                return a->cluster < b->cluster;
              });
    if (by_preempt.size() > opt.max_ttp_clusters) by_preempt.resize(opt.max_ttp_clusters);
    for (const ClusterCount* c : by_preempt) {
      EmpiricalCdf cdf = time_to_preemption_cdf(events, c->cluster);
      CsvWriter w(add(out_dir / ("ttp_cdf_" + detail::safe_filename(cluster_name(c->cluster)) +
                                 ".csv")),
                  {"runtime_s", "cdf"});
      for (const auto& [x, p] : cdf.steps()) w.row({fmt_double(x, 0), fmt_double(p, 9)});
    }
  }

  {
    CsvWriter w(add(out_dir / "taxonomy.csv"),
                {"cluster", "pilots", "events", "preemptions", "preempt_rate",
                 "requeue_fraction", "category"});
    for (const ClusterCategory& cat : cluster_taxonomy(events, opt.taxonomy))
      w.row({cluster_name(cat.cluster), fmt_i64(static_cast<std::int64_t>(cat.pilots)),
             fmt_i64(static_cast<std::int64_t>(cat.events)),
             fmt_i64(static_cast<std::int64_t>(cat.preemptions)),
             fmt_double(cat.preempt_rate, 6), fmt_double(cat.requeue_fraction, 6),
             cat.category});
  }

  {
    const ConfigHistograms hists = config_histograms(events);
    for (const auto& [name, hist] :
         {std::pair<const char*, const Histogram*>{"histogram_to_retire.csv",
                                                   &hists.to_retire_hours},
          std::pair<const char*, const Histogram*>{"histogram_to_die.csv",
                                                   &hists.to_die_hours}}) {
      CsvWriter w(add(out_dir / name), {"bin_left_hours", "count"});
      for (std::size_t i = 0; i < hist->counts.size(); ++i)
        w.row({fmt_double(hist->bin_left(i), 2),
               fmt_i64(static_cast<std::int64_t>(hist->counts[i]))});
    }
  }

  return written;
}

}  // namespace gridscope
