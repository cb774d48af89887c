#pragma once

// Single-stage baseline: a depth-first branch-and-bound over joint decisions
// (task -> melt, melt -> completion slot on an integer time grid).
//
// For each scalarization weight w the search orders its branches by
//   w * (1 - filling ratio) + (1 - w) * lead time / (N * max due date).
// Pruning is configurable. Pareto pruning (default) drops a node when an
// archived leaf weakly dominates the node's optimistic (filling ratio, lead
// time) bound, which makes a completed search exact. WeightedSum pruning drops
// a node whose scalarized bound cannot beat the incumbent of the current
// weight. Every leaf that enters the archive (or improves the incumbent) is
// kept; the pool is the union over all weights.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hyplan/budget.hpp"
#include "hyplan/instance.hpp"
#include "hyplan/metrics.hpp"
#include "hyplan/pool.hpp"
#include "hyplan/scheduler.hpp"

namespace hyplan {

struct MonolithicConfig {
  double time_budget = 0.1;  // seconds, shared by the whole weight grid
  BudgetMode budget_mode = BudgetMode::Work;
  std::vector<double> weight_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int time_grid_step = 1;
  int threads = 1;
  // WeightedSum: prune against the scalarized incumbent of the current weight.
  // Pareto: prune only nodes whose optimistic KPI pair is dominated by the
  // archive of leaves found so far (slower, exact when the search completes).
  enum class Pruning { WeightedSum, Pareto } pruning = Pruning::Pareto;

  void check() const {
    if (!(time_budget > 0.0)) throw std::invalid_argument("time budget must be positive");
    if (weight_grid.empty()) throw std::invalid_argument("weight grid is empty");
    for (double w : weight_grid)
      if (w < 0.0 || w > 1.0) throw std::invalid_argument("scalarization weights must lie in [0, 1]");
    if (time_grid_step < 1) throw std::invalid_argument("time grid step must be >= 1");
  }
};

// Latest completion slot worth considering: max due date plus a full chain of
// every possible melt.
inline int monolithic_horizon(const ProblemInstance& inst) {
  int chain = 0;
  for (std::size_t c = 0; c < inst.clusters.size(); ++c)
    for (std::size_t j = 0; j < inst.resources.size(); ++j)
      chain += inst.virtual_copies[c][j] * (inst.resources[j].processing_time + inst.resources[j].setup_time);
  return inst.max_due_date() + chain;
}

namespace detail {

class JointSearch {
 public:
  struct Leaf {
    Allocation allocation;
    std::vector<double> completion;
  };

  JointSearch(const ProblemInstance& inst, const MonolithicConfig& cfg, double weight, Budget& budget)
      : inst_(inst), weight_(weight), step_(cfg.time_grid_step), pruning_(cfg.pruning), budget_(budget) {
    for (std::size_t c = 0; c < inst.clusters.size(); ++c)
      for (std::size_t i = 0; i < inst.clusters[c].tasks.size(); ++i) order_.push_back({int(c), int(i)});
    std::stable_sort(order_.begin(), order_.end(), [&](const TaskRef& a, const TaskRef& b) {
      return task(a).weight > task(b).weight;
    });
    horizon_ = monolithic_horizon(inst);
    copies_used_.assign(inst.clusters.size(), std::vector<int>(inst.resources.size(), 0));
    occupied_.resize(inst.resources.size());
    int total = 0;
    for (std::size_t c = 0; c < inst.clusters.size(); ++c) {
      const int wc = inst.total_weight(c);
      total += wc;
      int bmax = 0;
      for (const auto& r : inst.resources) bmax = std::max(bmax, r.capacity);
      min_batches_ += (wc + bmax - 1) / bmax;
    }
    total_weight_ = total;
    min_capacity_ = std::numeric_limits<int>::max();
    max_capacity_ = 0;
    for (const auto& r : inst.resources) {
      min_capacity_ = std::min(min_capacity_, r.capacity);
      max_capacity_ = std::max(max_capacity_, r.capacity);
    }
    lead_norm_ = std::max(1.0, double(inst.num_tasks()) * inst.max_due_date());
  }

  void run() {
    remaining_weight_ = total_weight_;
    descend(0);
  }

  [[nodiscard]] const std::vector<Leaf>& incumbents() const noexcept { return incumbents_; }
  [[nodiscard]] std::size_t nodes() const noexcept { return nodes_; }
  [[nodiscard]] bool stopped() const noexcept { return stopped_; }

 private:
  struct OpenBatch {
    int cluster, resource, copy, load, z;
    std::vector<int> members;
  };
  struct Option {
    double key;
    int batch;  // >= 0 join; -1 open
    int resource;
    int z;
  };

  const Task& task(const TaskRef& t) const { return inst_.clusters[t.cluster].tasks[t.task]; }

  bool slot_free(int resource, int z) const {
    const auto& r = inst_.resources[resource];
    for (int other : occupied_[resource]) {
      const bool before = other + r.setup_time <= z - r.processing_time;
      const bool after = z + r.setup_time <= other - r.processing_time;
      if (!before && !after) return false;
    }
    return true;
  }

  // Distance from `due` to the nearest free slot on `resource` (or a large value).
  int nearest_free_distance(int resource, int due) const {
    const int lo = inst_.resources[resource].processing_time;
    const int limit = std::max(horizon_ - lo, 0) + std::abs(due - lo) + 1;
    for (int d = 0; d <= limit; ++d) {
      for (int z : {due - d, due + d}) {
        if (z < lo || z > horizon_ || (z - lo) % step_ != 0) continue;
        if (slot_free(resource, z)) return d;
      }
    }
    return std::numeric_limits<int>::max() / 4;
  }

  double fill_upper_bound() const {
    const int k = static_cast<int>(open_.size());
    if (k == 0) return 1.0;
    double ratio_sum = 0.0;
    for (const auto& b : open_) ratio_sum += double(b.load) / inst_.resources[b.resource].capacity;
    const double bound =
        (ratio_sum + double(remaining_weight_) / min_capacity_) / double(std::max(k, min_batches_));
    return std::min(1.0, bound);
  }

  double lead_lower_bound(std::size_t depth) const {
    double lb = lead_;
    for (std::size_t d = depth; d < order_.size(); ++d) {
      const auto& t = task(order_[d]);
      const int c = order_[d].cluster;
      int best = std::numeric_limits<int>::max() / 4;
      for (const auto& b : open_)
        if (b.cluster == c && b.load + t.weight <= inst_.resources[b.resource].capacity)
          best = std::min(best, std::abs(b.z - t.due_date));
      for (std::size_t j = 0; j < inst_.resources.size() && best > 0; ++j)
        if (copies_used_[c][j] < inst_.virtual_copies[c][j] && t.weight <= inst_.resources[j].capacity)
          best = std::min(best, nearest_free_distance(int(j), t.due_date));
      lb += best;
    }
    return lb;
  }

  double scalar(double fill, double lead) const {
    return weight_ * (1.0 - fill) + (1.0 - weight_) * lead / lead_norm_;
  }

  // True when no completion of the node can enter the pool.
  bool prune(double fill_ub, double lead_lb) const {
    if (pruning_ == MonolithicConfig::Pruning::Pareto) return dominated(fill_ub, lead_lb);
    return scalar(fill_ub, lead_lb) >= best_scalar_ - 1e-12;
  }

  bool dominated(double fill_ub, double lead_lb) const {
    constexpr double eps = 1e-12;
    for (const auto& p : archive_)
      if (p.filling_ratio >= fill_ub - eps && p.lead_time <= lead_lb + eps) return true;
    return false;
  }

  void record_leaf() {
    std::vector<std::pair<int, int>> ratios;
    for (const auto& b : open_) ratios.emplace_back(b.load, inst_.resources[b.resource].capacity);
    KpiPoint p{mean_fill(std::move(ratios)), lead_, 0};
    if (pruning_ == MonolithicConfig::Pruning::WeightedSum) {
      const double v = scalar(p.filling_ratio, p.lead_time);
      if (v >= best_scalar_ - 1e-12) return;
      best_scalar_ = v;
    } else if (dominated(p.filling_ratio, p.lead_time)) {
      return;
    }
    std::erase_if(archive_, [&](const KpiPoint& q) { return dominates(p, q); });
    archive_.push_back(p);

    Leaf leaf;
    leaf.allocation.source = "non-separation:w=" + fmt_num(weight_);
    for (const auto& b : open_) {
      Batch batch{b.cluster, b.resource, b.copy, b.members};
      std::sort(batch.members.begin(), batch.members.end());
      leaf.allocation.batches.push_back(std::move(batch));
      leaf.completion.push_back(b.z);
    }
    incumbents_.push_back(std::move(leaf));
  }

  double open_penalty() const {
    // Opening beyond the lower bound on the batch count dilutes the filling ratio.
    const int k = static_cast<int>(open_.size());
    if (k + 1 <= min_batches_ || k == 0) return 0.0;
    const double full = double(total_weight_) / max_capacity_;
    return full * (1.0 / k - 1.0 / (k + 1));
  }

  void descend(std::size_t depth) {
    if (stopped_) return;
    ++nodes_;
    budget_.spend(1);
    if ((nodes_ & 255) == 0 && budget_.exhausted()) {
      stopped_ = true;
      return;
    }
    if (depth == order_.size()) {
      record_leaf();
      return;
    }
    if (prune(fill_upper_bound(), lead_lower_bound(depth))) return;

    const auto ref = order_[depth];
    const auto& t = task(ref);
    std::vector<Option> options;
    for (std::size_t b = 0; b < open_.size(); ++b) {
      const auto& ob = open_[b];
      if (ob.cluster != ref.cluster || ob.load + t.weight > inst_.resources[ob.resource].capacity) continue;
      options.push_back({(1.0 - weight_) * std::abs(ob.z - t.due_date) / lead_norm_, int(b), ob.resource, ob.z});
    }
    const double penalty = weight_ * open_penalty();
    for (std::size_t j = 0; j < inst_.resources.size(); ++j) {
      if (copies_used_[ref.cluster][j] >= inst_.virtual_copies[ref.cluster][j]) continue;
      if (t.weight > inst_.resources[j].capacity) continue;
      for (int z = inst_.resources[j].processing_time; z <= horizon_; z += step_)
        if (slot_free(int(j), z))
          options.push_back({penalty + (1.0 - weight_) * std::abs(z - t.due_date) / lead_norm_, -1, int(j), z});
    }
    std::stable_sort(options.begin(), options.end(), [&](const Option& a, const Option& b) {
      if (a.key != b.key) return a.key < b.key;
      const int da = std::abs(a.z - t.due_date), db = std::abs(b.z - t.due_date);
      if (da != db) return da < db;
      return a.z < b.z;
    });

    for (const auto& opt : options) {
      if (stopped_) return;
      const int lead_delta = std::abs(opt.z - t.due_date);
      lead_ += lead_delta;
      remaining_weight_ -= t.weight;
      if (opt.batch >= 0) {
        // Re-index after recursing: deeper levels may reallocate open_.
        open_[opt.batch].load += t.weight;
        open_[opt.batch].members.push_back(ref.task);
        descend(depth + 1);
        open_[opt.batch].members.pop_back();
        open_[opt.batch].load -= t.weight;
      } else {
        const int copy = copies_used_[ref.cluster][opt.resource]++;
        open_.push_back({ref.cluster, opt.resource, copy, t.weight, opt.z, {ref.task}});
        occupied_[opt.resource].push_back(opt.z);
        descend(depth + 1);
        occupied_[opt.resource].pop_back();
        open_.pop_back();
        --copies_used_[ref.cluster][opt.resource];
      }
      remaining_weight_ += t.weight;
      lead_ -= lead_delta;
    }
  }

  const ProblemInstance& inst_;
  double weight_;
  int step_;
  MonolithicConfig::Pruning pruning_;
  double best_scalar_ = std::numeric_limits<double>::infinity();
  Budget& budget_;
  std::vector<TaskRef> order_;
  int horizon_ = 0;
  int total_weight_ = 0;
  int remaining_weight_ = 0;
  int min_batches_ = 0;
  int min_capacity_ = 1;
  int max_capacity_ = 1;
  double lead_norm_ = 1.0;

  std::vector<OpenBatch> open_;
  std::vector<std::vector<int>> copies_used_;
  std::vector<std::vector<int>> occupied_;
  double lead_ = 0.0;

  std::vector<KpiPoint> archive_;
  std::vector<Leaf> incumbents_;
  std::size_t nodes_ = 0;
  bool stopped_ = false;
};

}  // namespace detail

inline SolutionPool solve_monolithic(const ProblemInstance& inst, const MonolithicConfig& cfg,
                                     const SchedulerOptions& sched = {}, const KpiOptions& kpi = {}) {
  require_valid(inst);
  cfg.check();
  const double per_weight = cfg.time_budget / double(cfg.weight_grid.size());

  struct Result {
    std::vector<detail::JointSearch::Leaf> leaves;
    std::size_t nodes = 0;
    bool stopped = false;
  };
  std::vector<Result> results(cfg.weight_grid.size());
  auto run_weight = [&](std::size_t w) {
    Budget budget(per_weight, cfg.budget_mode, kSearchNodesPerSecond);
    detail::JointSearch search(inst, cfg, cfg.weight_grid[w], budget);
    search.run();
    results[w] = {search.incumbents(), search.nodes(), search.stopped()};
  };
  const auto workers = static_cast<std::size_t>(std::clamp(cfg.threads, 1, 64));
  if (workers == 1) {
    for (std::size_t w = 0; w < results.size(); ++w) run_weight(w);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(workers, results.size()); ++t)
      pool.emplace_back([&] {
        for (auto w = next++; w < results.size(); w = next++) run_weight(w);
      });
  }

  SolutionPool pool;
  pool.method = "non-separation";
  for (auto& r : results) {
    pool.stats.nodes += r.nodes;
    pool.stats.budget_exhausted = pool.stats.budget_exhausted || r.stopped;
    for (auto& leaf : r.leaves) {
      const auto problem = build_schedule_problem(leaf.allocation, inst, sched);
      PoolEntry e;
      e.schedule.completion = leaf.completion;
      for (std::size_t b = 0; b < problem.batches.size(); ++b)
        e.schedule.objective += std::abs(leaf.completion[b] - problem.batches[b].target);
      e.schedule.sequencing = sequencing_bits(problem, e.schedule.completion);
      e.kpi = kpis(leaf.allocation, e.schedule, inst, kpi);
      e.provenance = leaf.allocation.source;
      e.allocation = std::move(leaf.allocation);
      if (pool.add(std::move(e))) ++pool.stats.feasible;
      else ++pool.stats.duplicates;
    }
  }
  if (pool.empty()) pool.stats.diagnostic = "no feasible solution found within the budget";
  pool.finalize();
  return pool;
}

}  // namespace hyplan
