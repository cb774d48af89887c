#pragma once

// KPIs (filling ratio, lead time), Pareto filtering and the 2-D hypervolume.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplan/instance.hpp"
#include "hyplan/qubo.hpp"
#include "hyplan/scheduler.hpp"

namespace hyplan {

struct KpiPoint {
  double filling_ratio = 0.0;  // maximize
  double lead_time = 0.0;      // minimize
  std::size_t provenance = 0;
};

enum class FillAggregate { Mean, Min };
enum class LeadAggregate { Sum, Mean };

struct KpiOptions {
  FillAggregate fill = FillAggregate::Mean;
  LeadAggregate lead = LeadAggregate::Sum;
};

// Mean of load/capacity over (load, capacity) pairs. The sum is formed as one
// integer over the lcm of the capacities, so every allocation with the same
// true mean gets the same double (order and grouping of batches do not leak
// into the last bit). Falls back to a sorted floating sum if the lcm overflows.
inline double mean_fill(const std::vector<std::pair<int, int>>& load_capacity) {
  if (load_capacity.empty()) return 0.0;
  constexpr std::int64_t kLimit = std::int64_t(1) << 40;
  std::int64_t l = 1;
  bool exact = true;
  for (const auto& [load, cap] : load_capacity) {
    l = std::lcm(l, std::int64_t(cap));
    if (l > kLimit) {
      exact = false;
      break;
    }
  }
  const auto k = double(load_capacity.size());
  if (exact) {
    std::int64_t num = 0;
    for (const auto& [load, cap] : load_capacity) num += std::int64_t(load) * (l / cap);
    return double(num) / (double(l) * k);
  }
  std::vector<double> ratios;
  for (const auto& [load, cap] : load_capacity) ratios.push_back(double(load) / double(cap));
  std::sort(ratios.begin(), ratios.end());
  double sum = 0.0;
  for (double r : ratios) sum += r;
  return sum / k;
}

inline KpiPoint kpis(const Allocation& alloc, const Schedule& schedule, const ProblemInstance& inst,
                     const KpiOptions& opt = {}) {
  if (alloc.batches.empty()) throw std::invalid_argument("kpis of an empty allocation");
  if (schedule.completion.size() != alloc.batches.size())
    throw std::invalid_argument("schedule does not match the allocation");
  std::vector<std::pair<int, int>> ratios;
  double fill_min = 1.0;
  double lead = 0.0;
  std::size_t tasks = 0;
  for (std::size_t b = 0; b < alloc.batches.size(); ++b) {
    const auto& batch = alloc.batches[b];
    const int load = batch_load(batch, inst);
    const int cap = inst.resources.at(batch.resource).capacity;
    const double ratio = double(load) / double(cap);
    ratios.emplace_back(load, cap);
    fill_min = std::min(fill_min, ratio);
    for (int m : batch.members) {
      lead += std::abs(schedule.completion[b] - inst.clusters.at(batch.cluster).tasks.at(m).due_date);
      ++tasks;
    }
  }
  KpiPoint p;
  p.filling_ratio = opt.fill == FillAggregate::Mean ? mean_fill(std::move(ratios)) : fill_min;
  p.lead_time = opt.lead == LeadAggregate::Sum ? lead : lead / double(tasks);
  return p;
}

inline bool dominates(const KpiPoint& p, const KpiPoint& q) {
  return p.filling_ratio >= q.filling_ratio && p.lead_time <= q.lead_time &&
         (p.filling_ratio > q.filling_ratio || p.lead_time < q.lead_time);
}

// Non-dominated subset, sorted by filling ratio descending; exact duplicates
// keep the first occurrence.
inline std::vector<KpiPoint> pareto_filter(std::vector<KpiPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const KpiPoint& a, const KpiPoint& b) {
    if (a.filling_ratio != b.filling_ratio) return a.filling_ratio > b.filling_ratio;
    return a.lead_time < b.lead_time;
  });
  std::vector<KpiPoint> front;
  for (const auto& p : points) {
    // Sorted by fill desc: p survives iff its lead beats every kept point.
    if (front.empty() || p.lead_time < front.back().lead_time) front.push_back(p);
  }
  return front;
}

inline double utility(double lead_time, double l_max) {
  if (l_max == 0.0) return 1.0;
  return 1.0 - lead_time / l_max;
}

// Area dominated by the front in (filling ratio, 1 - lead/L_max) space with
// reference point (0, 0).
inline double hypervolume(const std::vector<KpiPoint>& front, double l_max) {
  if (front.empty()) return 0.0;
  if (l_max < 0.0) throw std::invalid_argument("L_max must be non-negative");
  for (const auto& p : front) {
    if (l_max == 0.0 && p.lead_time > 0.0)
      throw std::invalid_argument("L_max = 0 with a positive lead time");
    if (p.lead_time > l_max * (1.0 + 1e-12))
      throw std::invalid_argument("lead time exceeds L_max");
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : front)
    pts.emplace_back(std::clamp(p.filling_ratio, 0.0, 1.0),
                     std::clamp(utility(p.lead_time, l_max), 0.0, 1.0));
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double area = 0.0;
  double height = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    height = std::max(height, pts[k].second);
    const double next_f = k + 1 < pts.size() ? pts[k + 1].first : 0.0;
    area += (pts[k].first - next_f) * height;
  }
  return area;
}

struct MethodFront {
  std::string method;
  std::vector<KpiPoint> points;  // all evaluated points; filtered inside
};

struct MethodResult {
  std::string method;
  std::vector<KpiPoint> front;
  double hypervolume = 0.0;
  // HV_method / HV_baseline - 1; empty for the baseline or when HV_baseline = 0.
  std::optional<double> improvement_rate;
};

struct FrontComparison {
  double l_max = 0.0;
  std::size_t baseline = 0;
  std::vector<MethodResult> methods;
};

inline FrontComparison compare_fronts(const std::vector<MethodFront>& inputs, std::size_t baseline = 0) {
  if (inputs.size() < 2) throw std::invalid_argument("compare_fronts needs at least two methods");
  if (baseline >= inputs.size()) throw std::invalid_argument("baseline index out of range");
  FrontComparison cmp;
  cmp.baseline = baseline;
  for (const auto& in : inputs)
    for (const auto& p : in.points) cmp.l_max = std::max(cmp.l_max, p.lead_time);
  for (const auto& in : inputs) {
    MethodResult r;
    r.method = in.method;
    r.front = pareto_filter(in.points);
    r.hypervolume = hypervolume(r.front, cmp.l_max);
    cmp.methods.push_back(std::move(r));
  }
  const double base = cmp.methods[baseline].hypervolume;
  for (std::size_t m = 0; m < cmp.methods.size(); ++m)
    if (m != baseline && base > 0.0) cmp.methods[m].improvement_rate = cmp.methods[m].hypervolume / base - 1.0;
  return cmp;
}

// Fixed-format number rendering used by every report so outputs are byte-stable.
inline std::string fmt_num(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_front_csv(const FrontComparison& cmp, std::ostream& os) {
  os << "method,filling_ratio,lead_time,normalized_utility\n";
  for (const auto& m : cmp.methods)
    for (const auto& p : m.front)
      os << m.method << ',' << fmt_num(p.filling_ratio) << ',' << fmt_num(p.lead_time) << ','
         << fmt_num(utility(p.lead_time, cmp.l_max)) << '\n';
}

inline nlohmann::ordered_json comparison_summary(const FrontComparison& cmp) {
  nlohmann::ordered_json j;
  j["l_max"] = cmp.l_max;
  j["baseline"] = cmp.methods.at(cmp.baseline).method;
  auto methods = nlohmann::ordered_json::array();
  for (const auto& m : cmp.methods) {
    nlohmann::ordered_json jm;
    jm["method"] = m.method;
    jm["hypervolume"] = m.hypervolume;
    jm["front_size"] = m.front.size();
    if (m.improvement_rate)
      jm["improvement_rate_percent"] = *m.improvement_rate * 100.0;
    else
      jm["improvement_rate_percent"] = nullptr;
    methods.push_back(std::move(jm));
  }
  j["methods"] = std::move(methods);
  return j;
}

}  // namespace hyplan
