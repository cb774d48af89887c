#pragma once

// Separation pipeline (QUBO allocation -> exact scheduling), the
// separation-vs-baseline hypervolume benchmark and the swap-perturbation
// robustness study.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplan/annealer.hpp"
#include "hyplan/budget.hpp"
#include "hyplan/instance.hpp"
#include "hyplan/metrics.hpp"
#include "hyplan/monolithic.hpp"
#include "hyplan/pool.hpp"
#include "hyplan/qubo.hpp"
#include "hyplan/rng.hpp"
#include "hyplan/scheduler.hpp"

namespace hyplan {

struct SeparationConfig {
  std::optional<PenaltyConfig> penalties;  // auto-scaled when empty
  SaConfig sa;
  SchedulerOptions scheduler;
  KpiOptions kpi;
  double time_budget = 0.1;  // seconds, annealing stage
  BudgetMode budget_mode = BudgetMode::Work;

  void check() const {
    if (!(time_budget > 0.0)) throw std::invalid_argument("time budget must be positive");
    sa.check();
    if (penalties) penalties->check();
  }
};

// Decode -> feasibility filter -> dedupe -> exact schedule -> KPIs.
inline SolutionPool pool_from_samples(const ProblemInstance& inst, const QuboModel& model,
                                      const SampleSet& samples, const SeparationConfig& cfg,
                                      const std::string& method) {
  SolutionPool pool;
  pool.method = method;
  pool.stats.reads_executed = samples.records.size();
  std::set<std::vector<std::vector<int>>> seen;
  for (const auto& rec : samples.records) {
    auto [alloc, report] =
        decode(model, rec.assignment, inst, method + ":read=" + std::to_string(rec.read_index));
    if (!report.overall || alloc.batches.empty()) {
      ++pool.stats.infeasible;
      continue;
    }
    if (!seen.insert(canonical_key(alloc)).second) {
      ++pool.stats.duplicates;
      continue;
    }
    PoolEntry e;
    try {
      e = evaluate_allocation(std::move(alloc), inst, cfg.scheduler, cfg.kpi);
    } catch (const std::invalid_argument& err) {
      ++pool.stats.infeasible;
      pool.stats.diagnostic = err.what();
      continue;
    }
    if (pool.add(std::move(e)))
      ++pool.stats.feasible;
    else
      ++pool.stats.duplicates;
  }
  if (pool.empty() && pool.stats.diagnostic.empty())
    pool.stats.diagnostic = "no feasible allocation among " + std::to_string(samples.records.size()) + " samples";
  pool.finalize();
  return pool;
}

// Anneals under the budget: in Work mode the read count is fixed up front from
// the flip budget; in Wall mode reads are launched until the deadline passes.
inline SampleSet budgeted_sample(const QuboModel& model, const SeparationConfig& cfg) {
  const auto reads = static_cast<std::size_t>(cfg.sa.num_reads);
  const double per_read = double(model.num_variables()) * cfg.sa.sweeps_per_read;
  if (cfg.budget_mode == BudgetMode::Work) {
    const double limit = cfg.time_budget * kSaFlipsPerSecond;
    const auto affordable = static_cast<std::size_t>(std::ceil(limit / std::max(per_read, 1.0)));
    return sample_reads(model, cfg.sa, 0, std::clamp<std::size_t>(affordable, 1, reads));
  }
  Budget budget(cfg.time_budget, BudgetMode::Wall, kSaFlipsPerSecond);
  const auto chunk = static_cast<std::size_t>(std::max(1, cfg.sa.threads));
  SampleSet all = sample_reads(model, cfg.sa, 0, std::min(chunk, reads));
  std::size_t done = all.records.size();
  while (done < reads && !budget.exhausted()) {
    const auto n = std::min(chunk, reads - done);
    append(all, sample_reads(model, cfg.sa, done, n));
    done += n;
  }
  return all;
}

inline SolutionPool run_separation(const ProblemInstance& inst, const SeparationConfig& cfg) {
  require_valid(inst);
  cfg.check();
  const auto penalties = cfg.penalties ? *cfg.penalties : default_penalties(inst);
  const auto model = build_qubo(inst, penalties);
  const auto samples = budgeted_sample(model, cfg);
  return pool_from_samples(inst, model, samples, cfg, "separation-sa");
}

// External samples (e.g. from quantum hardware) routed through the same path.
inline SolutionPool run_separation_import(const ProblemInstance& inst, const SeparationConfig& cfg,
                                          const SampleSet& samples) {
  require_valid(inst);
  const auto penalties = cfg.penalties ? *cfg.penalties : default_penalties(inst);
  const auto model = build_qubo(inst, penalties);
  return pool_from_samples(inst, model, samples, cfg, "separation-import");
}

// ---------------------------------------------------------------------------
// Benchmark

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"separation-sa", "non-separation"};
  return m;
}

struct BenchmarkConfig {
  std::vector<int> sizes{6, 8, 10, 12};
  int instances_per_size = 10;
  std::vector<std::string> methods{"separation-sa", "non-separation"};
  std::string baseline = "non-separation";
  GeneratorParams generator;
  SeparationConfig separation;
  MonolithicConfig monolithic;
  std::uint64_t master_seed = 0;
  int threads = 1;

  void check() const {
    if (sizes.empty()) throw std::invalid_argument("benchmark needs at least one size");
    for (int s : sizes)
      if (s < 1) throw std::invalid_argument("problem sizes must be >= 1");
    if (instances_per_size < 1) throw std::invalid_argument("instances per size must be >= 1");
    if (methods.empty()) throw std::invalid_argument("benchmark needs at least one method");
    for (const auto& m : methods)
      if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
        throw std::invalid_argument("unknown method '" + m + "'");
    separation.check();
    monolithic.check();
  }
};

inline std::uint64_t instance_seed(std::uint64_t master, int size, int index) {
  return derive_seed(master, {std::uint64_t(size), std::uint64_t(index)});
}

struct BenchmarkCell {
  int size = 0;
  int index = 0;
  std::uint64_t instance_seed = 0;
  std::string method;
  double hypervolume = 0.0;
  double l_max = 0.0;
  std::size_t front_size = 0;
  std::size_t pool_size = 0;
  std::optional<double> improvement_rate;
  std::vector<KpiPoint> front;
  double wall_seconds = 0.0;
};

struct SizeSummary {
  int size = 0;
  std::vector<double> median_hypervolume;  // per method
  std::vector<double> mean_hypervolume;
  std::optional<double> median_improvement;
  std::optional<double> mean_improvement;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<BenchmarkCell> cells;  // size-major, then instance, then method
  std::vector<SizeSummary> sizes;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of empty set");
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

inline SolutionPool run_method(const std::string& method, const ProblemInstance& inst,
                               const BenchmarkConfig& cfg, std::uint64_t seed) {
  if (method == "separation-sa") {
    auto sep = cfg.separation;
    sep.sa.master_seed = derive_seed(seed, {1});
    sep.sa.threads = 1;
    return run_separation(inst, sep);
  }
  if (method == "non-separation") {
    auto mono = cfg.monolithic;
    mono.threads = 1;
    return solve_monolithic(inst, mono, cfg.separation.scheduler, cfg.separation.kpi);
  }
  throw std::invalid_argument("unknown method '" + method + "'");
}

// Runs fn(k) for k in [0, n) on up to `threads` workers; fn writes its own slot.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (auto k = next++; k < n; k = next++) fn(k);
    });
}

inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
  cfg.check();
  BenchmarkReport report;
  report.config = cfg;
  const auto per_instance = cfg.methods.size();
  const auto n_instances = cfg.sizes.size() * static_cast<std::size_t>(cfg.instances_per_size);
  report.cells.resize(n_instances * per_instance);
  const auto base_it = std::find(cfg.methods.begin(), cfg.methods.end(), cfg.baseline);
  const std::size_t baseline =
      base_it == cfg.methods.end() ? 0 : static_cast<std::size_t>(base_it - cfg.methods.begin());

  parallel_for(n_instances, cfg.threads, [&](std::size_t k) {
    const int size = cfg.sizes[k / cfg.instances_per_size];
    const int index = static_cast<int>(k % cfg.instances_per_size) + 1;
    const auto seed = instance_seed(cfg.master_seed, size, index);
    const auto inst = generate_instance(size, seed, cfg.generator);

    std::vector<MethodFront> fronts;
    std::vector<std::size_t> pool_sizes;
    std::vector<double> walls;
    for (const auto& method : cfg.methods) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto pool = run_method(method, inst, cfg, seed);
      walls.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      fronts.push_back({method, pool.points()});
      pool_sizes.push_back(pool.size());
    }
    std::vector<MethodResult> results;
    double l_max = 0.0;
    if (fronts.size() >= 2) {
      auto cmp = compare_fronts(fronts, baseline);
      results = std::move(cmp.methods);
      l_max = cmp.l_max;
    } else {
      for (const auto& p : fronts[0].points) l_max = std::max(l_max, p.lead_time);
      MethodResult r;
      r.method = fronts[0].method;
      r.front = pareto_filter(fronts[0].points);
      r.hypervolume = hypervolume(r.front, l_max);
      results.push_back(std::move(r));
    }
    for (std::size_t m = 0; m < per_instance; ++m) {
      auto& cell = report.cells[k * per_instance + m];
      cell.size = size;
      cell.index = index;
      cell.instance_seed = seed;
      cell.method = cfg.methods[m];
      cell.hypervolume = results[m].hypervolume;
      cell.l_max = l_max;
      cell.front_size = results[m].front.size();
      cell.front = results[m].front;
      cell.pool_size = pool_sizes[m];
      cell.improvement_rate = results[m].improvement_rate;
      cell.wall_seconds = walls[m];
    }
  });

  for (int size : cfg.sizes) {
    SizeSummary s;
    s.size = size;
    std::vector<double> improvements;
    for (std::size_t m = 0; m < per_instance; ++m) {
      std::vector<double> hv;
      for (const auto& cell : report.cells)
        if (cell.size == size && cell.method == cfg.methods[m]) {
          hv.push_back(cell.hypervolume);
          if (cell.improvement_rate) improvements.push_back(*cell.improvement_rate);
        }
      s.median_hypervolume.push_back(median(hv));
      s.mean_hypervolume.push_back(mean(hv));
    }
    if (!improvements.empty()) {
      s.median_improvement = median(improvements);
      s.mean_improvement = mean(improvements);
    }
    report.sizes.push_back(std::move(s));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Robustness

struct SwapRecord {
  TaskRef first;
  TaskRef second;
  std::size_t first_batch = 0;
  std::size_t second_batch = 0;
};

struct Perturbation {
  Allocation allocation;
  bool changed = false;
  int attempts = 0;
  std::optional<SwapRecord> swap;
};

inline constexpr int kSwapAttempts = 20;

// Swaps two tasks of the same cluster that sit in different batches; the swap
// is adopted only if both batches stay within capacity.
inline Perturbation perturb_allocation(const Allocation& alloc, const ProblemInstance& inst, Rng& rng,
                                       int max_attempts = kSwapAttempts) {
  Perturbation out;
  out.allocation = alloc;
  if (alloc.batches.size() < 2) return out;

  struct Slot {
    std::size_t batch;
    std::size_t pos;
  };
  std::vector<Slot> slots;
  for (std::size_t b = 0; b < alloc.batches.size(); ++b)
    for (std::size_t p = 0; p < alloc.batches[b].members.size(); ++p) slots.push_back({b, p});

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    out.attempts = attempt;
    std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
    const auto a = slots[pick(rng)];
    const int cluster = alloc.batches[a.batch].cluster;
    std::vector<Slot> partners;
    for (const auto& s : slots)
      if (s.batch != a.batch && alloc.batches[s.batch].cluster == cluster) partners.push_back(s);
    if (partners.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick_b(0, partners.size() - 1);
    const auto b = partners[pick_b(rng)];

    const auto& ba = alloc.batches[a.batch];
    const auto& bb = alloc.batches[b.batch];
    const auto& tasks = inst.clusters.at(cluster).tasks;
    const int ta = ba.members[a.pos], tb = bb.members[b.pos];
    const int load_a = batch_load(ba, inst) - tasks[ta].weight + tasks[tb].weight;
    const int load_b = batch_load(bb, inst) - tasks[tb].weight + tasks[ta].weight;
    if (load_a > inst.resources.at(ba.resource).capacity || load_b > inst.resources.at(bb.resource).capacity)
      continue;

    auto& na = out.allocation.batches[a.batch].members;
    auto& nb = out.allocation.batches[b.batch].members;
    na[a.pos] = tb;
    nb[b.pos] = ta;
    std::sort(na.begin(), na.end());
    std::sort(nb.begin(), nb.end());
    out.allocation.source = alloc.source + ":swap";
    out.changed = true;
    out.swap = SwapRecord{{cluster, ta}, {cluster, tb}, a.batch, b.batch};
    return out;
  }
  return out;
}

struct RobustnessConfig {
  BenchmarkConfig benchmark;  // sizes, instance counts, generator, separation settings
  bool pareto_only = false;   // perturb only Pareto-optimal entries
};

struct RobustnessEntry {
  int size = 0;
  int index = 0;
  std::uint64_t instance_seed = 0;
  double hv_before = 0.0;
  double hv_after = 0.0;
  double delta = 0.0;
  std::optional<double> improvement_rate;
  double l_max = 0.0;
  std::size_t pool_size = 0;
  std::size_t perturbed = 0;
  bool flagged = false;  // no swap could be adopted anywhere
  std::vector<SwapRecord> swaps;
  std::vector<KpiPoint> front_before;
  std::vector<KpiPoint> front_after;
};

inline RobustnessEntry robustness_from_pool(const SolutionPool& before, const ProblemInstance& inst,
                                            const SeparationConfig& cfg, Rng& rng, bool pareto_only = false) {
  RobustnessEntry r;
  r.pool_size = before.size();
  std::set<std::size_t> targets;
  if (pareto_only) {
    for (const auto& p : pareto_filter(before.points())) targets.insert(p.provenance);
  } else {
    for (std::size_t i = 0; i < before.size(); ++i) targets.insert(i);
  }
  SolutionPool after;
  after.method = before.method + "+swap";
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto& e = before.entries()[i];
    if (!targets.count(i)) {
      after.add(e);
      continue;
    }
    auto pert = perturb_allocation(e.allocation, inst, rng);
    if (!pert.changed) {
      after.add(e);
      continue;
    }
    ++r.perturbed;
    r.swaps.push_back(*pert.swap);
    after.add(evaluate_allocation(std::move(pert.allocation), inst, cfg.scheduler, cfg.kpi));
  }
  after.finalize();
  r.flagged = r.perturbed == 0;

  std::vector<MethodFront> fronts{{"after", after.points()}, {"before", before.points()}};
  if (before.empty()) return r;
  const auto cmp = compare_fronts(fronts, 1);
  r.l_max = cmp.l_max;
  r.hv_after = cmp.methods[0].hypervolume;
  r.hv_before = cmp.methods[1].hypervolume;
  r.front_after = cmp.methods[0].front;
  r.front_before = cmp.methods[1].front;
  r.delta = r.hv_after - r.hv_before;
  r.improvement_rate = cmp.methods[0].improvement_rate;
  return r;
}

inline RobustnessEntry robustness_experiment(const ProblemInstance& inst, const SeparationConfig& cfg,
                                             Rng& rng, bool pareto_only = false) {
  const auto pool = run_separation(inst, cfg);
  return robustness_from_pool(pool, inst, cfg, rng, pareto_only);
}

struct RobustnessSizeSummary {
  int size = 0;
  double median_before = 0.0;
  double median_after = 0.0;
  double mean_before = 0.0;
  double mean_after = 0.0;
  std::optional<double> median_rate;
  std::optional<double> mean_rate;
};

struct RobustnessReport {
  RobustnessConfig config;
  std::vector<RobustnessEntry> entries;
  std::vector<RobustnessSizeSummary> sizes;

  [[nodiscard]] double fraction_not_improved() const {
    if (entries.empty()) return 0.0;
    std::size_t ok = 0;
    for (const auto& e : entries)
      if (e.hv_after <= e.hv_before + 1e-12) ++ok;
    return double(ok) / double(entries.size());
  }
};

inline RobustnessReport run_robustness(const RobustnessConfig& cfg) {
  cfg.benchmark.check();
  const auto& b = cfg.benchmark;
  RobustnessReport report;
  report.config = cfg;
  const auto n = b.sizes.size() * static_cast<std::size_t>(b.instances_per_size);
  report.entries.resize(n);
  parallel_for(n, b.threads, [&](std::size_t k) {
    const int size = b.sizes[k / b.instances_per_size];
    const int index = static_cast<int>(k % b.instances_per_size) + 1;
    const auto seed = instance_seed(b.master_seed, size, index);
    const auto inst = generate_instance(size, seed, b.generator);
    auto sep = b.separation;
    sep.sa.master_seed = derive_seed(seed, {1});
    sep.sa.threads = 1;
    Rng rng = make_rng(derive_seed(seed, {2}));
    auto entry = robustness_experiment(inst, sep, rng, cfg.pareto_only);
    entry.size = size;
    entry.index = index;
    entry.instance_seed = seed;
    report.entries[k] = std::move(entry);
  });
  for (int size : b.sizes) {
    RobustnessSizeSummary s;
    s.size = size;
    std::vector<double> before, after, rates;
    for (const auto& e : report.entries)
      if (e.size == size) {
        before.push_back(e.hv_before);
        after.push_back(e.hv_after);
        if (e.improvement_rate) rates.push_back(*e.improvement_rate);
      }
    s.median_before = median(before);
    s.median_after = median(after);
    s.mean_before = mean(before);
    s.mean_after = mean(after);
    if (!rates.empty()) {
      s.median_rate = median(rates);
      s.mean_rate = mean(rates);
    }
    report.sizes.push_back(s);
  }
  return report;
}

}  // namespace hyplan
