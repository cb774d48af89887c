#pragma once

// Evaluated solutions (allocation + schedule + KPI) shared by every method.

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplan/instance.hpp"
#include "hyplan/metrics.hpp"
#include "hyplan/qubo.hpp"
#include "hyplan/scheduler.hpp"

namespace hyplan {

struct PoolEntry {
  Allocation allocation;
  Schedule schedule;
  KpiPoint kpi;
  std::string provenance;
};

struct PoolStats {
  std::size_t reads_executed = 0;
  std::size_t feasible = 0;
  std::size_t infeasible = 0;
  std::size_t duplicates = 0;
  std::size_t nodes = 0;
  bool budget_exhausted = false;
  std::string diagnostic;
};

// (cluster, resource, members..., completion) per batch, sorted: identifies an
// entry independently of copy labels and batch order.
using EntryKey = std::vector<std::pair<std::vector<int>, double>>;

inline EntryKey entry_key(const Allocation& a, const Schedule& s) {
  EntryKey key;
  for (std::size_t b = 0; b < a.batches.size(); ++b) {
    std::vector<int> id{a.batches[b].cluster, a.batches[b].resource};
    id.insert(id.end(), a.batches[b].members.begin(), a.batches[b].members.end());
    key.emplace_back(std::move(id), s.completion.at(b));
  }
  std::sort(key.begin(), key.end());
  return key;
}

class SolutionPool {
 public:
  std::string method;
  PoolStats stats;

  // False when an entry with the same allocation and completion times exists.
  bool add(PoolEntry e) {
    auto key = entry_key(e.allocation, e.schedule);
    if (!keys_.emplace(key, entries_.size()).second) return false;
    entries_.push_back(std::move(e));
    return true;
  }

  // Canonical order (by entry key) and provenance ids = position.
  void finalize() {
    std::vector<std::pair<EntryKey, std::size_t>> order(keys_.begin(), keys_.end());
    std::vector<PoolEntry> sorted;
    sorted.reserve(entries_.size());
    for (const auto& [key, idx] : order) sorted.push_back(std::move(entries_[idx]));
    entries_ = std::move(sorted);
    keys_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      entries_[i].kpi.provenance = i;
      keys_.emplace(entry_key(entries_[i].allocation, entries_[i].schedule), i);
    }
  }

  [[nodiscard]] const std::vector<PoolEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

  [[nodiscard]] std::vector<KpiPoint> points() const {
    std::vector<KpiPoint> pts;
    for (const auto& e : entries_) pts.push_back(e.kpi);
    return pts;
  }

 private:
  std::vector<PoolEntry> entries_;
  std::map<EntryKey, std::size_t> keys_;
};

// Schedules an allocation exactly and evaluates it.
inline PoolEntry evaluate_allocation(Allocation alloc, const ProblemInstance& inst,
                                     const SchedulerOptions& sched = {}, const KpiOptions& kpi = {}) {
  const auto problem = build_schedule_problem(alloc, inst, sched);
  auto schedule = solve_schedule(problem, sched);
  PoolEntry e;
  e.kpi = kpis(alloc, schedule, inst, kpi);
  e.provenance = alloc.source;
  e.allocation = std::move(alloc);
  e.schedule = std::move(schedule);
  return e;
}

// Every entry is feasible under the shared allocation and schedule audits.
inline ValidationReport audit_pool(const SolutionPool& pool, const ProblemInstance& inst,
                                   const SchedulerOptions& sched = {}) {
  ValidationReport r;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& e = pool.entries()[i];
    const std::string f = "entry[" + std::to_string(i) + "]";
    const auto rep = audit_allocation(e.allocation, inst);
    if (!rep.overall || !e.allocation.unassigned_tasks.empty()) {
      r.add(f, "allocation infeasible");
      continue;
    }
    const auto problem = build_schedule_problem(e.allocation, inst, sched);
    for (const auto& finding : validate_schedule(e.schedule, problem).findings)
      r.add(f + "." + finding.field, finding.message);
  }
  return r;
}

inline nlohmann::ordered_json to_json(const SolutionPool& pool, const ProblemInstance& inst) {
  nlohmann::ordered_json j;
  j["method"] = pool.method;
  nlohmann::ordered_json st;
  st["reads_executed"] = pool.stats.reads_executed;
  st["feasible"] = pool.stats.feasible;
  st["infeasible"] = pool.stats.infeasible;
  st["duplicates"] = pool.stats.duplicates;
  st["nodes"] = pool.stats.nodes;
  st["budget_exhausted"] = pool.stats.budget_exhausted;
  st["diagnostic"] = pool.stats.diagnostic;
  j["stats"] = std::move(st);
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : pool.entries()) {
    nlohmann::ordered_json je;
    je["id"] = e.kpi.provenance;
    je["provenance"] = e.provenance;
    je["filling_ratio"] = e.kpi.filling_ratio;
    je["lead_time"] = e.kpi.lead_time;
    je["schedule_objective"] = e.schedule.objective;
    auto batches = nlohmann::ordered_json::array();
    for (std::size_t b = 0; b < e.allocation.batches.size(); ++b) {
      const auto& batch = e.allocation.batches[b];
      nlohmann::ordered_json jb;
      jb["cluster_id"] = inst.clusters.at(batch.cluster).cluster_id;
      jb["resource_id"] = inst.resources.at(batch.resource).resource_id;
      jb["copy"] = batch.copy;
      std::vector<int> ids;
      for (int m : batch.members) ids.push_back(inst.clusters[batch.cluster].tasks.at(m).task_id);
      jb["tasks"] = ids;
      jb["completion"] = e.schedule.completion.at(b);
      batches.push_back(std::move(jb));
    }
    je["batches"] = std::move(batches);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

// Reads a pool back against its instance, re-solving nothing: completion times
// are taken from the file and KPIs recomputed from them.
template <class Json>
SolutionPool pool_from_json(const Json& j, const ProblemInstance& inst) {
  SolutionPool pool;
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw ParseError("pool file: missing 'entries' array");
  pool.method = j.value("method", std::string{});
  std::map<int, std::size_t> cluster_pos, resource_pos;
  std::vector<std::map<int, int>> task_pos(inst.clusters.size());
  for (std::size_t c = 0; c < inst.clusters.size(); ++c) {
    cluster_pos[inst.clusters[c].cluster_id] = c;
    for (std::size_t i = 0; i < inst.clusters[c].tasks.size(); ++i)
      task_pos[c][inst.clusters[c].tasks[i].task_id] = int(i);
  }
  for (std::size_t r = 0; r < inst.resources.size(); ++r) resource_pos[inst.resources[r].resource_id] = r;

  for (const auto& je : j["entries"]) {
    PoolEntry e;
    e.provenance = je.value("provenance", std::string{});
    e.allocation.source = e.provenance;
    for (const auto& jb : je.at("batches")) {
      Batch b;
      b.cluster = int(cluster_pos.at(jb.at("cluster_id").template get<int>()));
      b.resource = int(resource_pos.at(jb.at("resource_id").template get<int>()));
      b.copy = jb.at("copy").template get<int>();
      for (const auto& t : jb.at("tasks")) b.members.push_back(task_pos[b.cluster].at(t.template get<int>()));
      std::sort(b.members.begin(), b.members.end());
      e.schedule.completion.push_back(jb.at("completion").template get<double>());
      e.allocation.batches.push_back(std::move(b));
    }
    const auto problem = build_schedule_problem(e.allocation, inst);
    double obj = 0.0;
    for (std::size_t b = 0; b < problem.batches.size(); ++b)
      obj += std::abs(e.schedule.completion[b] - problem.batches[b].target);
    e.schedule.objective = obj;
    e.schedule.sequencing = sequencing_bits(problem, e.schedule.completion);
    e.kpi = kpis(e.allocation, e.schedule, inst);
    pool.add(std::move(e));
  }
  pool.finalize();
  return pool;
}

}  // namespace hyplan
