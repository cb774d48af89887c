#pragma once

// RunConfig: every tunable of the pipeline in one document with defaults.
// Files override defaults key by key; unknown keys are rejected so typos do
// not silently fall back to a default.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplan/annealer.hpp"
#include "hyplan/budget.hpp"
#include "hyplan/experiments.hpp"
#include "hyplan/instance.hpp"
#include "hyplan/metrics.hpp"
#include "hyplan/monolithic.hpp"
#include "hyplan/qubo.hpp"
#include "hyplan/scheduler.hpp"

namespace hyplan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t seed = 0;
  GeneratorParams generator;
  std::optional<PenaltyConfig> penalties;  // empty: auto-scaled per instance
  SaConfig sa;
  SchedulerOptions scheduler;
  KpiOptions kpi;
  double separation_budget = 0.1;
  BudgetMode budget_mode = BudgetMode::Work;
  MonolithicConfig monolithic;
  std::vector<int> sizes{6, 8, 10, 12};
  int instances_per_size = 10;
  std::vector<std::string> methods{"separation-sa", "non-separation"};
  std::string baseline = "non-separation";
  bool pareto_only = false;

  // Execution settings: they never change results, so they are not part of
  // the provenance document.
  int threads = 1;
  std::string out = "out";
};

inline const char* to_string(FillAggregate f) { return f == FillAggregate::Mean ? "mean" : "min"; }
inline const char* to_string(LeadAggregate l) { return l == LeadAggregate::Sum ? "sum" : "mean"; }

// The resolved document embedded into every output file.
inline nlohmann::ordered_json provenance_json(const RunConfig& c) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["seed"] = c.seed;
  j["generator"] = ordered_json{{"weight_min", c.generator.weight_min},
                                {"weight_max", c.generator.weight_max},
                                {"due_min", c.generator.due_min},
                                {"due_max", c.generator.due_max},
                                {"capacity", c.generator.capacity},
                                {"setup_time", c.generator.setup_time},
                                {"processing_time", c.generator.processing_time},
                                {"full_virtual_copies", c.generator.full_virtual_copies}};
  if (c.penalties)
    j["penalties"] = ordered_json{{"lambda_deadline", c.penalties->lambda_deadline},
                                  {"lambda_one_hot", c.penalties->lambda_one_hot},
                                  {"lambda_capacity", c.penalties->lambda_capacity},
                                  {"lambda_xy", c.penalties->lambda_xy},
                                  {"alpha", c.penalties->alpha}};
  else
    j["penalties"] = "auto";
  j["annealer"] = ordered_json{{"num_reads", c.sa.num_reads},
                               {"sweeps_per_read", c.sa.sweeps_per_read},
                               {"beta_min", c.sa.beta_min},
                               {"beta_max", c.sa.beta_max}};
  j["scheduler"] = ordered_json{{"target", to_string(c.scheduler.target)},
                                {"max_batches_per_resource", c.scheduler.max_batches_per_resource}};
  j["kpi"] = ordered_json{{"fill", to_string(c.kpi.fill)}, {"lead", to_string(c.kpi.lead)}};
  j["separation"] = ordered_json{{"time_budget", c.separation_budget}};
  j["monolithic"] = ordered_json{{"time_budget", c.monolithic.time_budget},
                                 {"weight_grid", c.monolithic.weight_grid},
                                 {"time_grid_step", c.monolithic.time_grid_step},
                                 {"pruning", c.monolithic.pruning == MonolithicConfig::Pruning::Pareto ? "pareto"
                                                                                                      : "weighted_sum"}};
  j["budget_mode"] = to_string(c.budget_mode);
  j["experiment"] = ordered_json{{"sizes", c.sizes},
                                 {"instances_per_size", c.instances_per_size},
                                 {"methods", c.methods},
                                 {"baseline", c.baseline},
                                 {"pareto_only", c.pareto_only}};
  return j;
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  auto j = provenance_json(c);
  j["threads"] = c.threads;
  j["out"] = c.out;
  return j;
}

namespace detail {

template <class Json>
void reject_unknown(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("config: unknown key '" + where + "." + it.key() + "'");
}

template <class T, class Json>
void read(const Json& j, const char* key, T& into, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: '" + where + "." + key + "' has the wrong type");
  }
}

}  // namespace detail

// Overlays the document onto `c` (defaults for missing keys).
template <class Json>
void apply_json(RunConfig& c, const Json& j) {
  using detail::read;
  detail::reject_unknown(j, "$",
                         {"seed", "generator", "penalties", "annealer", "scheduler", "kpi", "separation",
                          "monolithic", "budget_mode", "experiment", "threads", "out"});
  read(j, "seed", c.seed, "$");
  read(j, "threads", c.threads, "$");
  read(j, "out", c.out, "$");
  if (j.contains("generator")) {
    const auto& g = j["generator"];
    detail::reject_unknown(g, "$.generator",
                           {"weight_min", "weight_max", "due_min", "due_max", "capacity", "setup_time",
                            "processing_time", "full_virtual_copies"});
    read(g, "weight_min", c.generator.weight_min, "$.generator");
    read(g, "weight_max", c.generator.weight_max, "$.generator");
    read(g, "due_min", c.generator.due_min, "$.generator");
    read(g, "due_max", c.generator.due_max, "$.generator");
    read(g, "capacity", c.generator.capacity, "$.generator");
    read(g, "setup_time", c.generator.setup_time, "$.generator");
    read(g, "processing_time", c.generator.processing_time, "$.generator");
    read(g, "full_virtual_copies", c.generator.full_virtual_copies, "$.generator");
  }
  if (j.contains("penalties")) {
    const auto& p = j["penalties"];
    if (p.is_string()) {
      if (p.template get<std::string>() != "auto") throw ConfigError("config: '$.penalties' must be \"auto\" or an object");
      c.penalties.reset();
    } else {
      detail::reject_unknown(p, "$.penalties",
                             {"lambda_deadline", "lambda_one_hot", "lambda_capacity", "lambda_xy", "alpha"});
      PenaltyConfig pc;
      read(p, "lambda_deadline", pc.lambda_deadline, "$.penalties");
      read(p, "lambda_one_hot", pc.lambda_one_hot, "$.penalties");
      read(p, "lambda_capacity", pc.lambda_capacity, "$.penalties");
      read(p, "lambda_xy", pc.lambda_xy, "$.penalties");
      read(p, "alpha", pc.alpha, "$.penalties");
      c.penalties = pc;
    }
  }
  if (j.contains("annealer")) {
    const auto& a = j["annealer"];
    detail::reject_unknown(a, "$.annealer", {"num_reads", "sweeps_per_read", "beta_min", "beta_max"});
    read(a, "num_reads", c.sa.num_reads, "$.annealer");
    read(a, "sweeps_per_read", c.sa.sweeps_per_read, "$.annealer");
    read(a, "beta_min", c.sa.beta_min, "$.annealer");
    read(a, "beta_max", c.sa.beta_max, "$.annealer");
  }
  try {
    if (j.contains("scheduler")) {
      const auto& s = j["scheduler"];
      detail::reject_unknown(s, "$.scheduler", {"target", "max_batches_per_resource"});
      std::string target = to_string(c.scheduler.target);
      read(s, "target", target, "$.scheduler");
      c.scheduler.target = target_rule_from_string(target);
      read(s, "max_batches_per_resource", c.scheduler.max_batches_per_resource, "$.scheduler");
    }
    if (j.contains("kpi")) {
      const auto& k = j["kpi"];
      detail::reject_unknown(k, "$.kpi", {"fill", "lead"});
      std::string fill = to_string(c.kpi.fill), lead = to_string(c.kpi.lead);
      read(k, "fill", fill, "$.kpi");
      read(k, "lead", lead, "$.kpi");
      if (fill != "mean" && fill != "min") throw ConfigError("config: '$.kpi.fill' must be mean|min");
      if (lead != "sum" && lead != "mean") throw ConfigError("config: '$.kpi.lead' must be sum|mean");
      c.kpi.fill = fill == "mean" ? FillAggregate::Mean : FillAggregate::Min;
      c.kpi.lead = lead == "sum" ? LeadAggregate::Sum : LeadAggregate::Mean;
    }
    if (j.contains("budget_mode")) {
      std::string mode;
      read(j, "budget_mode", mode, "$");
      c.budget_mode = budget_mode_from_string(mode);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (j.contains("separation")) {
    const auto& s = j["separation"];
    detail::reject_unknown(s, "$.separation", {"time_budget"});
    read(s, "time_budget", c.separation_budget, "$.separation");
  }
  if (j.contains("monolithic")) {
    const auto& m = j["monolithic"];
    detail::reject_unknown(m, "$.monolithic", {"time_budget", "weight_grid", "time_grid_step", "pruning"});
    read(m, "time_budget", c.monolithic.time_budget, "$.monolithic");
    read(m, "weight_grid", c.monolithic.weight_grid, "$.monolithic");
    read(m, "time_grid_step", c.monolithic.time_grid_step, "$.monolithic");
    if (m.contains("pruning")) {
      std::string rule;
      read(m, "pruning", rule, "$.monolithic");
      if (rule == "pareto")
        c.monolithic.pruning = MonolithicConfig::Pruning::Pareto;
      else if (rule == "weighted_sum")
        c.monolithic.pruning = MonolithicConfig::Pruning::WeightedSum;
      else
        throw ConfigError("config: '$.monolithic.pruning' must be pareto|weighted_sum");
    }
  }
  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    detail::reject_unknown(e, "$.experiment", {"sizes", "instances_per_size", "methods", "baseline", "pareto_only"});
    read(e, "sizes", c.sizes, "$.experiment");
    read(e, "instances_per_size", c.instances_per_size, "$.experiment");
    read(e, "methods", c.methods, "$.experiment");
    read(e, "baseline", c.baseline, "$.experiment");
    read(e, "pareto_only", c.pareto_only, "$.experiment");
  }
}

inline SeparationConfig separation_config(const RunConfig& c) {
  SeparationConfig s;
  s.penalties = c.penalties;
  s.sa = c.sa;
  s.sa.master_seed = c.seed;
  s.sa.threads = c.threads;
  s.scheduler = c.scheduler;
  s.kpi = c.kpi;
  s.time_budget = c.separation_budget;
  s.budget_mode = c.budget_mode;
  return s;
}

inline MonolithicConfig monolithic_config(const RunConfig& c) {
  auto m = c.monolithic;
  m.budget_mode = c.budget_mode;
  m.threads = c.threads;
  return m;
}

inline BenchmarkConfig benchmark_config(const RunConfig& c) {
  BenchmarkConfig b;
  b.sizes = c.sizes;
  b.instances_per_size = c.instances_per_size;
  b.methods = c.methods;
  b.baseline = c.baseline;
  b.generator = c.generator;
  b.separation = separation_config(c);
  b.monolithic = monolithic_config(c);
  b.master_seed = c.seed;
  b.threads = c.threads;
  return b;
}

// Throws ConfigError describing the first invalid setting.
inline void check(const RunConfig& c) {
  try {
    benchmark_config(c).check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.threads < 1) throw ConfigError("config: threads must be >= 1");
  const auto& g = c.generator;
  if (g.weight_min < 1 || g.weight_max < g.weight_min)
    throw ConfigError("config: generator weights must satisfy 1 <= weight_min <= weight_max");
  if (g.due_min < 1 || g.due_max < g.due_min)
    throw ConfigError("config: generator due dates must satisfy 1 <= due_min <= due_max");
  if (g.capacity < g.weight_max) throw ConfigError("config: generator capacity must be >= weight_max");
  if (g.setup_time < 0 || g.processing_time < 1)
    throw ConfigError("config: generator needs setup_time >= 0 and processing_time >= 1");
}

}  // namespace hyplan
