#pragma once

// Markdown report over the stats and fit CSV bundles. The CSVs stay the
// machine-readable contract; this is the human summary. Reads only files,
// never in-memory state, so `report` can run on any previously produced
// output directories.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridscope/csv.hpp"
#include "gridscope/errors.hpp"

namespace gridscope {
namespace detail {

inline std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

inline void md_table(std::ostringstream& os, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  os << '|';
  for (const auto& h : header) os << ' ' << md_cell(h) << " |";
  os << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) os << " --- |";
  os << '\n';
  for (const auto& row : rows) {
    os << '|';
    for (const auto& cell : row) os << ' ' << md_cell(cell) << " |";
    os << '\n';
  }
  os << '\n';
}

// One (value, cumulative probability) table read back from a CDF csv.
struct CdfSteps {
  std::vector<std::pair<double, double>> steps;  // ascending in both columns

  // Smallest value with F(value) >= p; the empirical quantile.
  double quantile(double p) const {
    for (const auto& [x, f] : steps)
      if (f >= p) return x;
    return steps.empty() ? 0.0 : steps.back().first;
  }

  double at(double x) const {
    double f = 0.0;
    for (const auto& [v, p] : steps) {
      if (v > x) break;
      f = p;
    }
    return f;
  }
};

inline CdfSteps read_cdf_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cx = 0, cp = 1;
  CdfSteps out;
  out.steps.reserve(t.rows.size());
  for (const auto& row : t.rows)
    out.steps.emplace_back(std::stod(row[cx]), std::stod(row[cp]));
  return out;
}

inline std::string hours(double seconds) { return fmt_double(seconds / 3600.0, 2); }

inline std::string pct(double fraction) { return fmt_double(fraction * 100.0, 2); }

}  // namespace detail

// Renders the whole report; throws IoError/CsvError when a required stats
// file is absent or malformed. fits_dir may lack fits.csv only if fitting
// was skipped, in which case the section says so.
inline std::string render_report(const std::filesystem::path& stats_dir,
                                 const std::filesystem::path& fits_dir) {
  namespace fs = std::filesystem;
  std::ostringstream os;
  os << "# Pilot termination report\n\n";

  {
    const CsvTable counts = read_csv(stats_dir / "counts.csv");
    const auto& r = counts.rows.at(0);
    os << "Classified events: " << r[counts.col("events")]
       << "  \nDistinct pilots: " << r[counts.col("distinct_pilots")]
       << "  \nDistinct instances: " << r[counts.col("distinct_instances")]
       << "  \nCensored by lookahead: " << r[counts.col("censored_lookahead")] << "\n\n";
  }

  {
    os << "## Label mix\n\n";
    const CsvTable mix = read_csv(stats_dir / "class_mix.csv");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : mix.rows)
      rows.push_back({r[mix.col("label")], r[mix.col("count")],
                      detail::pct(std::stod(r[mix.col("fraction")]))});
    detail::md_table(os, {"label", "count", "% of events"}, rows);
  }

  {
    os << "## Events over time\n\n";
    const CsvTable t = read_csv(stats_dir / "events_over_time.csv");
    const std::size_t ct = t.col("total");
    const std::int64_t first_bin = std::stoll(t.rows.front()[t.col("bin_start")]);
    os << t.rows.size() << " bins from t=" << first_bin << ". Busiest bins:\n\n";
    std::vector<std::size_t> order(t.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::stoll(t.rows[a][ct]) > std::stoll(t.rows[b][ct]);
    });
    if (order.size() > 10) order.resize(10);
    std::sort(order.begin(), order.end());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i : order) {
      const auto& r = t.rows[i];
      const double off_h =
          static_cast<double>(std::stoll(r[t.col("bin_start")]) - first_bin) / 3600.0;
      rows.push_back({fmt_double(off_h, 1), r[ct], r[t.col("Retire")], r[t.col("Kill")],
                      r[t.col("IdleShutDown")], r[t.col("Preemption")],
                      r[t.col("NetworkIssue")]});
    }
    detail::md_table(os,
                     {"hour", "total", "Retire", "Kill", "IdleShutDown", "Preemption",
                      "NetworkIssue"},
                     rows);
  }

  const CsvTable clusters = read_csv(stats_dir / "cluster_counts.csv");
  {
    os << "## Clusters\n\n";
    os << clusters.rows.size() << " clusters. Largest by event count:\n\n";
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < clusters.rows.size() && i < 10; ++i) {
      const auto& r = clusters.rows[i];
      rows.push_back({r[clusters.col("cluster")], r[clusters.col("pilots")],
                      r[clusters.col("total")]});
    }
    detail::md_table(os, {"cluster", "pilots", "events"}, rows);
  }

  {
    os << "## Runtime percentiles by label (hours)\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const char* label :
         {"Retire", "Kill", "IdleShutDown", "Preemption", "NetworkIssue"}) {
      const fs::path p = stats_dir / (std::string("duration_cdf_") + label + ".csv");
      if (!fs::exists(p)) continue;
      const detail::CdfSteps cdf = detail::read_cdf_csv(p);
      rows.push_back({label, detail::hours(cdf.quantile(0.25)),
                      detail::hours(cdf.quantile(0.50)), detail::hours(cdf.quantile(0.75)),
                      detail::hours(cdf.quantile(0.90)),
                      detail::hours(cdf.quantile(0.95))});
    }
    detail::md_table(os, {"label", "p25", "p50", "p75", "p90", "p95"}, rows);
  }

  {
    os << "## Preemption chain\n\n";
    const CsvTable chain = read_csv(stats_dir / "chain.csv");
    if (chain.rows.empty()) {
      os << "No preemptions observed.\n\n";
    } else {
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : chain.rows)
        rows.push_back({r[chain.col("k")], r[chain.col("n_k")],
                        detail::pct(std::stod(r[chain.col("ratio_k")])),
                        r[chain.col("conditional_k")].empty()
                            ? std::string("")
                            : detail::pct(std::stod(r[chain.col("conditional_k")]))});
      detail::md_table(os, {"k", "pilots preempted >= k", "% of pilots",
                            "% preempted again"},
                       rows);
    }
  }

  {
    os << "## Preemptions by cluster\n\n";
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < clusters.rows.size(); ++i)
      if (std::stoll(clusters.rows[i][clusters.col("Preemption")]) > 0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::stoll(clusters.rows[a][clusters.col("Preemption")]) >
             std::stoll(clusters.rows[b][clusters.col("Preemption")]);
    });
    if (order.size() > 10) order.resize(10);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i : order) {
      const auto& r = clusters.rows[i];
      rows.push_back({r[clusters.col("cluster")], r[clusters.col("Preemption")],
                      r[clusters.col("total")]});
    }
    detail::md_table(os, {"cluster", "preemptions", "events"}, rows);
  }

  {
    os << "## Time to preemption\n\n";
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(stats_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("ttp_cdf_", 0) == 0) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : files) {
      std::string cluster = p.stem().string().substr(8);
      const detail::CdfSteps cdf = detail::read_cdf_csv(p);
      rows.push_back({cluster, detail::pct(cdf.at(1800)), detail::pct(cdf.at(3600)),
                      detail::pct(cdf.at(10800)), detail::hours(cdf.quantile(0.5))});
    }
    detail::md_table(os,
                     {"cluster", "% within 30 min", "% within 1 h", "% within 3 h",
                      "median (h)"},
                     rows);
  }

  {
    os << "## Cluster taxonomy\n\n";
    const CsvTable tax = read_csv(stats_dir / "taxonomy.csv");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : tax.rows)
      rows.push_back({r[tax.col("cluster")], r[tax.col("pilots")],
                      r[tax.col("preemptions")],
                      detail::pct(std::stod(r[tax.col("preempt_rate")])),
                      detail::pct(std::stod(r[tax.col("requeue_fraction")])),
                      r[tax.col("category")]});
    detail::md_table(os,
                     {"cluster", "pilots", "preemptions", "preempt rate %",
                      "requeue %", "category"},
                     rows);
  }

  {
    os << "## Configured lifetimes\n\n";
    for (const auto& [file, what] :
         {std::pair<const char*, const char*>{"histogram_to_retire.csv",
                                              "retirement offset"},
          std::pair<const char*, const char*>{"histogram_to_die.csv", "death offset"}}) {
      const CsvTable h = read_csv(stats_dir / file);
      std::size_t best = 0;
      for (std::size_t i = 1; i < h.rows.size(); ++i)
        if (std::stoll(h.rows[i][h.col("count")]) >
            std::stoll(h.rows[best][h.col("count")]))
          best = i;
      os << "Most common " << what << ": " << h.rows[best][h.col("bin_left_hours")]
         << " h bin (" << h.rows[best][h.col("count")] << " instances)\n\n";
    }
  }

  {
    os << "## Fitted runtime distributions\n\n";
    const fs::path fits_path = fits_dir / "fits.csv";
    if (!fs::exists(fits_path)) {
      os << "No fits were produced.\n";
    } else {
      const CsvTable fits = read_csv(fits_path);
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : fits.rows)
        rows.push_back({r[fits.col("cluster")], r[fits.col("label")],
                        r[fits.col("family")], r[fits.col("params")], r[fits.col("ks")],
                        r[fits.col("n")]});
      detail::md_table(os, {"cluster", "label", "best family", "params", "KS", "n"},
                       rows);
      const fs::path failures = fits_dir / "fit_failures.csv";
      if (fs::exists(failures)) {
        const CsvTable f = read_csv(failures);
        if (!f.rows.empty()) {
          os << "Groups that could not be fit:\n\n";
          std::vector<std::vector<std::string>> frows;
          for (const auto& r : f.rows)
            frows.push_back({r[f.col("cluster")], r[f.col("label")], r[f.col("reason")]});
          detail::md_table(os, {"cluster", "label", "reason"}, frows);
        }
      }
    }
  }

  return os.str();
}

inline void write_report(const std::filesystem::path& stats_dir,
                         const std::filesystem::path& fits_dir,
                         const std::filesystem::path& out_path) {
  const std::string text = render_report(stats_dir, fits_dir);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + out_path.string());
  out << text;
}

}  // namespace gridscope
