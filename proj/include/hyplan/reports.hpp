#pragma once

// Report files for the benchmark and robustness experiments. Every
// deterministic report carries the resolved configuration; wall-clock
// timings go to a separate file because they differ from run to run.

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplan/config.hpp"
#include "hyplan/experiments.hpp"
#include "hyplan/metrics.hpp"
#include "hyplan/svg.hpp"

namespace hyplan {

inline std::string opt_num(const std::optional<double>& v, double scale = 1.0) {
  return v ? fmt_num(*v * scale) : std::string{};
}

inline nlohmann::ordered_json opt_json(const std::optional<double>& v, double scale = 1.0) {
  return v ? nlohmann::ordered_json(*v * scale) : nlohmann::ordered_json(nullptr);
}

inline void write_provenance_line(std::ostream& os, const RunConfig& cfg) {
  os << "# provenance: " << provenance_json(cfg).dump() << '\n';
}

inline nlohmann::ordered_json front_json(const std::vector<KpiPoint>& front) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& p : front) a.push_back({p.filling_ratio, p.lead_time});
  return a;
}

// ---------------------------------------------------------------------------
// Benchmark

inline void write_benchmark_csv(const BenchmarkReport& r, const RunConfig& cfg, std::ostream& os) {
  write_provenance_line(os, cfg);
  os << "size,instance,instance_seed,method,hypervolume,l_max,front_size,pool_size,improvement_rate_percent\n";
  for (const auto& c : r.cells)
    os << c.size << ',' << c.index << ',' << c.instance_seed << ',' << c.method << ',' << fmt_num(c.hypervolume)
       << ',' << fmt_num(c.l_max) << ',' << c.front_size << ',' << c.pool_size << ','
       << opt_num(c.improvement_rate, 100.0) << '\n';
}

// Per-size aggregates in the improvement-table format.
inline void write_benchmark_table(const BenchmarkReport& r, const RunConfig& cfg, std::ostream& os) {
  write_provenance_line(os, cfg);
  os << "size";
  for (const auto& m : r.config.methods) os << ",median_hv_" << m << ",mean_hv_" << m;
  os << ",median_improvement_percent,mean_improvement_percent\n";
  for (const auto& s : r.sizes) {
    os << s.size;
    for (std::size_t m = 0; m < r.config.methods.size(); ++m)
      os << ',' << fmt_num(s.median_hypervolume[m]) << ',' << fmt_num(s.mean_hypervolume[m]);
    os << ',' << opt_num(s.median_improvement, 100.0) << ',' << opt_num(s.mean_improvement, 100.0) << '\n';
  }
}

inline nlohmann::ordered_json benchmark_json(const BenchmarkReport& r, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["config"] = provenance_json(cfg);
  auto sizes = nlohmann::ordered_json::array();
  for (const auto& s : r.sizes) {
    nlohmann::ordered_json js;
    js["size"] = s.size;
    for (std::size_t m = 0; m < r.config.methods.size(); ++m)
      js["hypervolume"][r.config.methods[m]] = {{"median", s.median_hypervolume[m]}, {"mean", s.mean_hypervolume[m]}};
    js["improvement_rate_percent"] = {{"median", opt_json(s.median_improvement, 100.0)},
                                      {"mean", opt_json(s.mean_improvement, 100.0)}};
    sizes.push_back(std::move(js));
  }
  j["sizes"] = std::move(sizes);
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json jc;
    jc["size"] = c.size;
    jc["instance"] = c.index;
    jc["instance_seed"] = c.instance_seed;
    jc["method"] = c.method;
    jc["hypervolume"] = c.hypervolume;
    jc["l_max"] = c.l_max;
    jc["pool_size"] = c.pool_size;
    jc["improvement_rate_percent"] = opt_json(c.improvement_rate, 100.0);
    jc["front"] = front_json(c.front);
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline void write_benchmark_timings(const BenchmarkReport& r, std::ostream& os) {
  os << "size,instance,method,wall_seconds\n";
  for (const auto& c : r.cells) os << c.size << ',' << c.index << ',' << c.method << ',' << c.wall_seconds << '\n';
}

inline void plot_benchmark_hv(const BenchmarkReport& r, std::ostream& os) {
  std::vector<svg::BarGroup> groups;
  for (const auto& s : r.sizes) groups.push_back({std::to_string(s.size), s.median_hypervolume});
  svg::grouped_bars(os, groups, r.config.methods, "Median hypervolume per problem size", "number of orders (problem size)",
                    "hypervolume");
}

inline void plot_benchmark_improvement(const BenchmarkReport& r, std::ostream& os) {
  std::vector<svg::BarGroup> groups;
  for (const auto& s : r.sizes)
    groups.push_back({std::to_string(s.size), {s.median_improvement.value_or(0.0) * 100.0}});
  svg::grouped_bars(os, groups, {"median improvement"}, "Improvement rate of hypervolume vs " + r.config.baseline,
                    "number of orders (problem size)", "improvement rate (%)");
}

// Rebuilds the comparison of one instance from its cells (fronts are stored
// already filtered, so re-filtering is the identity).
inline FrontComparison cell_comparison(const BenchmarkReport& r, std::size_t instance_pos) {
  const auto per = r.config.methods.size();
  FrontComparison cmp;
  for (std::size_t m = 0; m < per; ++m) {
    const auto& c = r.cells.at(instance_pos * per + m);
    cmp.l_max = c.l_max;
    cmp.methods.push_back({c.method, c.front, c.hypervolume, c.improvement_rate});
  }
  return cmp;
}

// ---------------------------------------------------------------------------
// Robustness

inline void write_robustness_csv(const RobustnessReport& r, const RunConfig& cfg, std::ostream& os) {
  write_provenance_line(os, cfg);
  os << "size,instance,instance_seed,hv_before,hv_after,delta,improvement_rate_percent,l_max,pool_size,perturbed,"
        "flagged\n";
  for (const auto& e : r.entries)
    os << e.size << ',' << e.index << ',' << e.instance_seed << ',' << fmt_num(e.hv_before) << ','
       << fmt_num(e.hv_after) << ',' << fmt_num(e.delta) << ',' << opt_num(e.improvement_rate, 100.0) << ','
       << fmt_num(e.l_max) << ',' << e.pool_size << ',' << e.perturbed << ',' << (e.flagged ? 1 : 0) << '\n';
}

inline nlohmann::ordered_json robustness_json(const RobustnessReport& r, const RunConfig& cfg,
                                              const std::vector<ProblemInstance>* instances = nullptr) {
  nlohmann::ordered_json j;
  j["config"] = provenance_json(cfg);
  j["fraction_not_improved"] = r.fraction_not_improved();
  auto sizes = nlohmann::ordered_json::array();
  for (const auto& s : r.sizes)
    sizes.push_back({{"size", s.size},
                     {"hv_before", {{"median", s.median_before}, {"mean", s.mean_before}}},
                     {"hv_after", {{"median", s.median_after}, {"mean", s.mean_after}}},
                     {"improvement_rate_percent",
                      {{"median", opt_json(s.median_rate, 100.0)}, {"mean", opt_json(s.mean_rate, 100.0)}}}});
  j["sizes"] = std::move(sizes);
  auto entries = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.entries.size(); ++k) {
    const auto& e = r.entries[k];
    nlohmann::ordered_json je;
    je["size"] = e.size;
    je["instance"] = e.index;
    je["instance_seed"] = e.instance_seed;
    je["hv_before"] = e.hv_before;
    je["hv_after"] = e.hv_after;
    je["delta"] = e.delta;
    je["improvement_rate_percent"] = opt_json(e.improvement_rate, 100.0);
    je["l_max"] = e.l_max;
    je["flagged"] = e.flagged;
    auto swaps = nlohmann::ordered_json::array();
    for (const auto& s : e.swaps) {
      auto id = [&](const TaskRef& t) {
        return instances ? instances->at(k).clusters.at(t.cluster).tasks.at(t.task).task_id : t.task;
      };
      swaps.push_back({{"cluster", s.first.cluster},
                       {"tasks", {id(s.first), id(s.second)}},
                       {"batches", {s.first_batch, s.second_batch}}});
    }
    je["swaps"] = std::move(swaps);
    je["front_before"] = front_json(e.front_before);
    je["front_after"] = front_json(e.front_after);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline void plot_robustness(const RobustnessReport& r, std::ostream& os) {
  std::vector<svg::BarGroup> groups;
  for (const auto& s : r.sizes) groups.push_back({std::to_string(s.size), {s.median_before, s.median_after}});
  svg::grouped_bars(os, groups, {"before swap", "after swap"}, "Robustness of the separation method",
                    "number of orders (problem size)", "median hypervolume");
}

inline void plot_robustness_rate(const RobustnessReport& r, std::ostream& os) {
  std::vector<svg::BarGroup> groups;
  for (const auto& s : r.sizes) groups.push_back({std::to_string(s.size), {s.median_rate.value_or(0.0) * 100.0}});
  svg::grouped_bars(os, groups, {"median rate"}, "Hypervolume change after swaps (negative = deterioration)",
                    "number of orders (problem size)", "improvement rate (%)");
}

}  // namespace hyplan
