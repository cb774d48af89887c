#pragma once

// Exact scheduling of melts (batches) on their resources: choose completion
// times z minimizing sum |z - F| subject to no two melts of one resource
// overlapping, with setup time T between consecutive melts.
//
// The disjunctive big-M model is kept for export and auditing; the solver
// itself enumerates batch orders per resource and, for a fixed order, solves
// the resulting chain-constrained L1 problem exactly as an isotonic median
// regression (pool adjacent violators).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hyplan/instance.hpp"
#include "hyplan/qubo.hpp"

namespace hyplan {

enum class TargetRule { WeightedMedian, Median, Mean };

inline const char* to_string(TargetRule r) {
  switch (r) {
    case TargetRule::WeightedMedian: return "weighted-median";
    case TargetRule::Median: return "median";
    case TargetRule::Mean: return "mean";
  }
  return "?";
}

inline TargetRule target_rule_from_string(const std::string& s) {
  if (s == "weighted-median") return TargetRule::WeightedMedian;
  if (s == "median") return TargetRule::Median;
  if (s == "mean") return TargetRule::Mean;
  throw std::invalid_argument("unknown target rule '" + s + "'");
}

struct SchedulerOptions {
  TargetRule target = TargetRule::WeightedMedian;
  int max_batches_per_resource = 10;
};

struct ScheduledBatch {
  int cluster = 0;
  int resource = 0;
  int copy = 0;
  int processing_time = 1;
  double target = 0.0;
  std::vector<int> members;
};

struct ScheduleProblem {
  std::vector<ScheduledBatch> batches;
  std::vector<int> setup_time;                     // per resource position
  std::vector<std::vector<std::size_t>> by_resource;  // batch indices, ascending
  double horizon = 0.0;
  double big_m = 0.0;
};

// Lower weighted median: smallest d with cumulative weight >= half the total.
inline double weighted_median(std::vector<std::pair<double, double>> value_weight) {
  if (value_weight.empty()) throw std::invalid_argument("weighted median of an empty set");
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (const auto& vw : value_weight) total += vw.second;
  double acc = 0.0;
  for (const auto& [v, w] : value_weight) {
    acc += w;
    if (2.0 * acc >= total) return v;
  }
  return value_weight.back().first;
}

inline double batch_target(const Batch& b, const ProblemInstance& inst, TargetRule rule) {
  const auto& tasks = inst.clusters.at(b.cluster).tasks;
  if (b.members.empty()) throw std::invalid_argument("empty batch has no target");
  std::vector<std::pair<double, double>> vw;
  double sum = 0.0;
  for (int m : b.members) {
    const auto& t = tasks.at(m);
    vw.emplace_back(t.due_date, rule == TargetRule::WeightedMedian ? t.weight : 1.0);
    sum += t.due_date;
  }
  if (rule == TargetRule::Mean) return sum / double(b.members.size());
  return weighted_median(std::move(vw));
}

inline ScheduleProblem build_schedule_problem(const Allocation& alloc, const ProblemInstance& inst,
                                              const SchedulerOptions& opt = {}) {
  const auto audit = audit_allocation(alloc, inst);
  if (!audit.overall || !alloc.unassigned_tasks.empty())
    throw std::invalid_argument("cannot schedule an infeasible allocation");

  ScheduleProblem p;
  p.setup_time.resize(inst.resources.size());
  p.by_resource.resize(inst.resources.size());
  for (std::size_t j = 0; j < inst.resources.size(); ++j) p.setup_time[j] = inst.resources[j].setup_time;

  double max_target = 0.0;
  double chain = 0.0;
  for (const auto& b : alloc.batches) {
    if (b.members.empty()) throw std::invalid_argument("allocation contains an empty batch");
    ScheduledBatch sb;
    sb.cluster = b.cluster;
    sb.resource = b.resource;
    sb.copy = b.copy;
    sb.processing_time = inst.resources.at(b.resource).processing_time;
    sb.target = batch_target(b, inst, opt.target);
    sb.members = b.members;
    p.by_resource[b.resource].push_back(p.batches.size());
    max_target = std::max(max_target, sb.target);
    chain += sb.processing_time + p.setup_time[b.resource];
    p.batches.push_back(std::move(sb));
  }
  p.big_m = max_target + chain + 1.0;
  p.horizon = p.big_m;
  return p;
}

struct SequencingBit {
  std::size_t first = 0;   // batch index l1
  std::size_t second = 0;  // batch index l2, l1 < l2, same resource
  // Big-M selector: s = 0 activates "l1 precedes l2", s = 1 "l2 precedes l1".
  bool s = false;
};

struct Schedule {
  std::vector<double> completion;  // per batch index
  std::vector<SequencingBit> sequencing;
  double objective = 0.0;
};

struct OrderTiming {
  std::vector<double> completion;  // aligned with the order
  double objective = 0.0;
};

namespace detail {

// L1 isotonic regression with y_0 >= 0: minimize sum |y_k - a_k| s.t.
// 0 <= y_0 <= y_1 <= ... using block medians (lower median on ties).
inline std::vector<double> isotonic_l1_nonneg(const std::vector<double>& a) {
  struct Block {
    std::vector<double> values;
    double median = 0.0;
    std::size_t count = 0;
  };
  auto lower_median = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
  };
  std::vector<Block> blocks;
  for (double x : a) {
    blocks.push_back({{x}, x, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].median > blocks.back().median) {
      auto last = std::move(blocks.back());
      blocks.pop_back();
      auto& prev = blocks.back();
      prev.values.insert(prev.values.end(), last.values.begin(), last.values.end());
      prev.count += last.count;
      prev.median = lower_median(prev.values);
    }
  }
  std::vector<double> y;
  y.reserve(a.size());
  for (const auto& b : blocks)
    for (std::size_t k = 0; k < b.count; ++k) y.push_back(std::max(0.0, b.median));
  return y;
}

}  // namespace detail

// With the order fixed, z_{k+1} >= z_k + T + R_{k+1} and z_0 >= R_0. Writing
// z_k = y_k + c_k with c the tight chain offsets turns this into an isotonic
// L1 fit of y to F - c with y_0 >= 0.
inline OrderTiming optimal_times_for_order(const std::vector<std::size_t>& order,
                                           const ScheduleProblem& problem) {
  if (order.empty()) throw std::invalid_argument("empty order");
  const int resource = problem.batches.at(order.front()).resource;
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("order lists a batch twice");
  if (sorted != problem.by_resource.at(resource))
    throw std::invalid_argument("order must cover every batch of its resource exactly once");

  const double setup = problem.setup_time.at(resource);
  std::vector<double> offset(order.size());
  std::vector<double> residual(order.size());
  double c = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& b = problem.batches[order[k]];
    c += (k == 0 ? 0.0 : setup) + b.processing_time;
    offset[k] = c;
    residual[k] = b.target - c;
  }
  const auto y = detail::isotonic_l1_nonneg(residual);
  OrderTiming t;
  t.completion.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    t.completion[k] = y[k] + offset[k];
    t.objective += std::abs(t.completion[k] - problem.batches[order[k]].target);
  }
  return t;
}

inline std::vector<SequencingBit> sequencing_bits(const ScheduleProblem& p,
                                                  const std::vector<double>& completion) {
  std::vector<SequencingBit> bits;
  for (const auto& group : p.by_resource)
    for (std::size_t a = 0; a < group.size(); ++a)
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        const auto l1 = group[a], l2 = group[b];
        bits.push_back({l1, l2, completion[l2] < completion[l1]});
      }
  return bits;
}

inline Schedule solve_schedule(const ScheduleProblem& problem, const SchedulerOptions& opt = {}) {
  for (std::size_t j = 0; j < problem.by_resource.size(); ++j)
    if (problem.by_resource[j].size() > static_cast<std::size_t>(opt.max_batches_per_resource))
      throw std::invalid_argument("resource " + std::to_string(j) + " carries " +
                                  std::to_string(problem.by_resource[j].size()) +
                                  " batches; exact scheduling is limited to " +
                                  std::to_string(opt.max_batches_per_resource));
  Schedule s;
  s.completion.assign(problem.batches.size(), 0.0);
  for (const auto& group : problem.by_resource) {
    if (group.empty()) continue;
    std::vector<std::size_t> order = group;  // ascending: lexicographically first
    std::vector<std::size_t> best_order;
    OrderTiming best;
    best.objective = std::numeric_limits<double>::infinity();
    do {
      auto t = optimal_times_for_order(order, problem);
      if (t.objective < best.objective - 1e-9) {
        best = std::move(t);
        best_order = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    for (std::size_t k = 0; k < best_order.size(); ++k) s.completion[best_order[k]] = best.completion[k];
    s.objective += best.objective;
  }
  s.sequencing = sequencing_bits(problem, s.completion);
  return s;
}

namespace detail {
inline std::string batch_name(const ScheduledBatch& b) {
  return "batch(" + std::to_string(b.cluster) + "," + std::to_string(b.resource) + "," +
         std::to_string(b.copy) + ")";
}
}  // namespace detail

inline ValidationReport validate_schedule(const Schedule& s, const ScheduleProblem& p) {
  constexpr double eps = 1e-9;
  ValidationReport r;
  if (s.completion.size() != p.batches.size()) {
    r.add("completion", "expected " + std::to_string(p.batches.size()) + " completion times");
    return r;
  }
  double objective = 0.0;
  for (std::size_t b = 0; b < p.batches.size(); ++b) {
    const auto& batch = p.batches[b];
    if (s.completion[b] < batch.processing_time - eps)
      r.add(detail::batch_name(batch), "completes at " + std::to_string(s.completion[b]) +
                                           " before its processing time " +
                                           std::to_string(batch.processing_time));
    objective += std::abs(s.completion[b] - batch.target);
  }
  for (std::size_t j = 0; j < p.by_resource.size(); ++j) {
    const auto& group = p.by_resource[j];
    const double setup = p.setup_time[j];
    for (std::size_t a = 0; a < group.size(); ++a)
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        const auto& ba = p.batches[group[a]];
        const auto& bb = p.batches[group[b]];
        const double za = s.completion[group[a]], zb = s.completion[group[b]];
        const bool a_first = za + setup <= zb - bb.processing_time + eps;
        const bool b_first = zb + setup <= za - ba.processing_time + eps;
        if (!a_first && !b_first)
          r.add(detail::batch_name(ba) + "/" + detail::batch_name(bb),
                "intervals overlap or violate setup time (completions " + std::to_string(za) +
                    ", " + std::to_string(zb) + ")");
      }
  }
  for (const auto& bit : s.sequencing) {
    if (bit.first >= p.batches.size() || bit.second >= p.batches.size()) {
      r.add("sequencing", "bit references an unknown batch");
      continue;
    }
    const auto& b1 = p.batches[bit.first];
    const auto& b2 = p.batches[bit.second];
    const double setup = p.setup_time.at(b1.resource);
    const double z1 = s.completion[bit.first], z2 = s.completion[bit.second];
    const double sv = bit.s ? 1.0 : 0.0;
    const bool c1 = z1 + setup <= z2 - b2.processing_time + p.big_m * sv + eps;
    const bool c2 = z2 + setup <= z1 - b1.processing_time + p.big_m * (1.0 - sv) + eps;
    if (!c1 || !c2)
      r.add("sequencing", "big-M disjunction violated for " + detail::batch_name(b1) + "/" +
                              detail::batch_name(b2));
  }
  if (std::abs(objective - s.objective) > 1e-6 * (1.0 + std::abs(objective)))
    r.add("objective", "stored objective " + std::to_string(s.objective) +
                           " differs from recomputed " + std::to_string(objective));
  return r;
}

// CPLEX-LP text of the disjunctive model with the computed big-M.
inline void write_schedule_lp(const ScheduleProblem& p, std::ostream& os) {
  os.precision(17);
  os << "\\ batch scheduling, big-M = " << p.big_m << "\nMinimize\n obj:";
  for (std::size_t b = 0; b < p.batches.size(); ++b) os << (b ? " + " : " ") << "t_" << b;
  if (p.batches.empty()) os << " 0";
  os << "\nSubject To\n";
  for (std::size_t j = 0; j < p.by_resource.size(); ++j) {
    const auto& g = p.by_resource[j];
    const double setup = p.setup_time[j];
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        const auto l1 = g[a], l2 = g[b];
        const double r1 = p.batches[l1].processing_time, r2 = p.batches[l2].processing_time;
        os << " seq_" << l1 << '_' << l2 << "_a: z_" << l1 << " - z_" << l2 << " - " << p.big_m
           << " s_" << l1 << '_' << l2 << " <= " << -(setup + r2) << '\n';
        os << " seq_" << l1 << '_' << l2 << "_b: z_" << l2 << " - z_" << l1 << " + " << p.big_m
           << " s_" << l1 << '_' << l2 << " <= " << p.big_m - setup - r1 << '\n';
      }
  }
  for (std::size_t b = 0; b < p.batches.size(); ++b) {
    os << " dev_" << b << "_p: z_" << b << " - t_" << b << " <= " << p.batches[b].target << '\n';
    os << " dev_" << b << "_n: - z_" << b << " - t_" << b << " <= " << -p.batches[b].target << '\n';
  }
  os << "Bounds\n";
  for (std::size_t b = 0; b < p.batches.size(); ++b)
    os << " z_" << b << " >= " << p.batches[b].processing_time << "\n t_" << b << " >= 0\n";
  os << "Binaries\n";
  for (const auto& g : p.by_resource)
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b) os << " s_" << g[a] << '_' << g[b] << '\n';
  os << "End\n";
}

}  // namespace hyplan
