#pragma once

// Independent reference implementations used as test oracles. Each one is
// written straight from the model definitions and deliberately shares no
// algorithmic code with the library (only data types).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "hyplan.hpp"

namespace oracle {

using hyplan::Assignment;
using hyplan::KpiPoint;
using hyplan::PenaltyConfig;
using hyplan::ProblemInstance;

// ---------------------------------------------------------------------------
// Penalty Hamiltonian, evaluated term by term in its unexpanded form:
//   H = sum y
//     + l_d  * sum_{cjl} sum_{i,k ordered} (S_i - S_k)^2 x_i x_k
//     + l_oh * sum_{ci} (1 - sum_{jl} x)^2
//     + l_cap* sum_{cjl} (sum_i W_i x_i - alpha B_j y)^2
//     + l_xy * sum_{cijl} (y - x - 1/2)^2
inline double reference_energy(const ProblemInstance& inst, const PenaltyConfig& p, const hyplan::VariableMap& vars,
                               const Assignment& q) {
  auto X = [&](int c, int i, int j, int l) { return double(q.at(vars.x(c, i, j, l))); };
  auto Y = [&](int c, int j, int l) { return double(q.at(vars.y(c, j, l))); };
  double filling = 0.0, deadline = 0.0, one_hot = 0.0, capacity = 0.0, xy = 0.0;
  for (int c = 0; c < int(inst.clusters.size()); ++c) {
    const auto& tasks = inst.clusters[c].tasks;
    const int n = int(tasks.size());
    for (int j = 0; j < int(inst.resources.size()); ++j)
      for (int l = 0; l < inst.virtual_copies[c][j]; ++l) {
        filling += Y(c, j, l);
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) {
            const double d = tasks[i].due_date - tasks[k].due_date;
            deadline += d * d * X(c, i, j, l) * X(c, k, j, l);
          }
        double load = 0.0;
        for (int i = 0; i < n; ++i) load += tasks[i].weight * X(c, i, j, l);
        const double gap = load - p.alpha * inst.resources[j].capacity * Y(c, j, l);
        capacity += gap * gap;
        for (int i = 0; i < n; ++i) {
          const double r = Y(c, j, l) - X(c, i, j, l) - 0.5;
          xy += r * r;
        }
      }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < int(inst.resources.size()); ++j)
        for (int l = 0; l < inst.virtual_copies[c][j]; ++l) s += X(c, i, j, l);
      one_hot += (1.0 - s) * (1.0 - s);
    }
  }
  return filling + p.lambda_deadline * deadline + p.lambda_one_hot * one_hot + p.lambda_capacity * capacity +
         p.lambda_xy * xy;
}

// Minimum of the model's energy by plain enumeration (no incremental updates).
struct NaiveMin {
  double energy = std::numeric_limits<double>::infinity();
  std::vector<Assignment> argmins;
};

inline NaiveMin naive_minimum(const hyplan::QuboModel& m, double tol = 1e-9) {
  const auto n = m.num_variables();
  NaiveMin best;
  Assignment a(n);
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << n); ++s) {
    for (std::size_t v = 0; v < n; ++v) a[v] = (s >> (n - 1 - v)) & 1u;
    const double e = hyplan::energy(m, a);
    if (e < best.energy - tol) {
      best.energy = e;
      best.argmins = {a};
    } else if (std::abs(e - best.energy) <= tol) {
      best.argmins.push_back(a);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Scheduling: for every resource, every batch order, and every completion
// vector on the integer grid, via an exact DP over the grid (integer data make
// an integer optimum exist). Returns min sum |z - F|.
inline double schedule_grid_optimum(const hyplan::ScheduleProblem& p) {
  double total = 0.0;
  int hi_t = 0;
  for (const auto& b : p.batches) hi_t = std::max(hi_t, int(std::ceil(b.target)));
  for (std::size_t j = 0; j < p.by_resource.size(); ++j) {
    const auto& ids = p.by_resource[j];
    if (ids.empty()) continue;
    int span = 0;
    for (auto b : ids) span += int(p.batches[b].processing_time) + int(p.setup_time[j]);
    const int horizon = hi_t + span + 1;
    std::vector<std::size_t> order(ids.begin(), ids.end());
    std::sort(order.begin(), order.end());
    double best = std::numeric_limits<double>::infinity();
    do {
      // dp[t]: best cost of the prefix with the last batch completing at exactly t.
      const double inf = std::numeric_limits<double>::infinity();
      std::vector<double> dp(horizon + 1, inf);
      const auto& first = p.batches[order[0]];
      for (int t = int(first.processing_time); t <= horizon; ++t) dp[t] = std::abs(t - first.target);
      for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& b = p.batches[order[k]];
        const int gap = int(b.processing_time) + int(p.setup_time[j]);
        std::vector<double> next(horizon + 1, inf);
        double prefix = inf;
        for (int t = 0; t <= horizon; ++t) {
          if (t - gap >= 0) prefix = std::min(prefix, dp[t - gap]);
          if (t >= int(b.processing_time) && prefix < inf) next[t] = prefix + std::abs(t - b.target);
        }
        dp = std::move(next);
      }
      best = std::min(best, *std::min_element(dp.begin(), dp.end()));
    } while (std::next_permutation(order.begin(), order.end()));
    total += best;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Pareto and hypervolume.

inline std::vector<KpiPoint> quadratic_pareto(const std::vector<KpiPoint>& pts) {
  std::vector<KpiPoint> out;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    bool dominated = false;
    for (std::size_t b = 0; b < pts.size() && !dominated; ++b) {
      const auto& p = pts[b];
      const auto& q = pts[a];
      dominated = p.filling_ratio >= q.filling_ratio && p.lead_time <= q.lead_time &&
                  (p.filling_ratio > q.filling_ratio || p.lead_time < q.lead_time);
    }
    if (dominated) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const KpiPoint& o) {
      return o.filling_ratio == pts[a].filling_ratio && o.lead_time == pts[a].lead_time;
    });
    if (!dup) out.push_back(pts[a]);
  }
  std::sort(out.begin(), out.end(), [](const KpiPoint& x, const KpiPoint& y) { return x.filling_ratio > y.filling_ratio; });
  return out;
}

struct McEstimate {
  double mean = 0.0;
  double sigma = 0.0;  // standard error of the mean
};

// Uniform samples in the unit square; a sample counts when some front point
// dominates it in (fill, 1 - lead / L_max).
inline McEstimate mc_hypervolume(const std::vector<KpiPoint>& front, double l_max, std::size_t samples,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double f = u(rng), v = u(rng);
    for (const auto& p : front)
      if (f <= p.filling_ratio && v <= 1.0 - p.lead_time / l_max) {
        ++hits;
        break;
      }
  }
  const double m = double(hits) / double(samples);
  return {m, std::sqrt(m * (1.0 - m) / double(samples))};
}

// ---------------------------------------------------------------------------
// Exhaustive joint front: every allocation (task -> resource, melt) within the
// virtual-copy caps and capacities, every completion vector on the integer
// grid [R, max_due + sum V (R + T)] with per-resource exclusivity. Only the
// minimum lead per allocation matters since fill is fixed by the allocation.
inline std::vector<KpiPoint> exhaustive_front(const ProblemInstance& inst) {
  struct Slot {
    int cluster, task;
  };
  std::vector<Slot> tasks;
  for (int c = 0; c < int(inst.clusters.size()); ++c)
    for (int i = 0; i < int(inst.clusters[c].tasks.size()); ++i) tasks.push_back({c, i});
  int horizon = 0;
  for (const auto& c : inst.clusters)
    for (const auto& t : c.tasks) horizon = std::max(horizon, t.due_date);
  for (std::size_t c = 0; c < inst.clusters.size(); ++c)
    for (std::size_t j = 0; j < inst.resources.size(); ++j)
      horizon += inst.virtual_copies[c][j] * (inst.resources[j].processing_time + inst.resources[j].setup_time);

  // Batch label per task: (resource, index among that (cluster, resource)'s melts).
  std::vector<std::pair<int, int>> label(tasks.size());
  std::vector<std::vector<int>> used(inst.clusters.size(), std::vector<int>(inst.resources.size(), 0));
  std::vector<KpiPoint> points;

  auto evaluate = [&] {
    struct B {
      int cluster, resource, load;
      std::vector<int> dues;
    };
    std::vector<B> batches;
    std::vector<std::vector<std::vector<int>>> id(inst.clusters.size(),
                                                  std::vector<std::vector<int>>(inst.resources.size()));
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const auto [j, l] = label[t];
      auto& ids = id[tasks[t].cluster][j];
      if (int(ids.size()) <= l) ids.resize(l + 1, -1);
      if (ids[l] < 0) {
        ids[l] = int(batches.size());
        batches.push_back({tasks[t].cluster, j, 0, {}});
      }
      const auto& task = inst.clusters[tasks[t].cluster].tasks[tasks[t].task];
      batches[ids[l]].load += task.weight;
      batches[ids[l]].dues.push_back(task.due_date);
    }
    std::vector<std::pair<int, int>> lc;
    for (const auto& b : batches) {
      if (b.load > inst.resources[b.resource].capacity) return;
      lc.emplace_back(b.load, inst.resources[b.resource].capacity);
    }
    const double fill = hyplan::mean_fill(lc);
    // Minimum lead over completion vectors.
    std::vector<int> z(batches.size());
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, double)> place = [&](std::size_t b, double lead) {
      if (lead >= best) return;
      if (b == batches.size()) {
        best = lead;
        return;
      }
      const auto& r = inst.resources[batches[b].resource];
      for (int t = r.processing_time; t <= horizon; ++t) {
        bool ok = true;
        for (std::size_t o = 0; o < b && ok; ++o)
          if (batches[o].resource == batches[b].resource)
            ok = z[o] + r.setup_time <= t - r.processing_time || t + r.setup_time <= z[o] - r.processing_time;
        if (!ok) continue;
        z[b] = t;
        double add = 0.0;
        for (int d : batches[b].dues) add += std::abs(t - d);
        place(b + 1, lead + add);
      }
    };
    place(0, 0.0);
    points.push_back({fill, best, 0});
  };

  std::function<void(std::size_t)> assign = [&](std::size_t t) {
    if (t == tasks.size()) {
      evaluate();
      return;
    }
    const int c = tasks[t].cluster;
    for (int j = 0; j < int(inst.resources.size()); ++j) {
      // Restricted growth: reuse an opened melt or open the next one.
      for (int l = 0; l <= used[c][j] && l < inst.virtual_copies[c][j]; ++l) {
        label[t] = {j, l};
        const bool opened = l == used[c][j];
        if (opened) ++used[c][j];
        assign(t + 1);
        if (opened) --used[c][j];
      }
    }
  };
  assign(0);
  return quadratic_pareto(points);
}

// ---------------------------------------------------------------------------
// Toy family for ground-state checks: generator defaults, 2 to 5 tasks, at
// most 20 QUBO variables.
inline std::vector<ProblemInstance> toy_family(std::size_t count, std::uint64_t master = 2024) {
  std::vector<ProblemInstance> out;
  for (std::uint64_t k = 0; out.size() < count; ++k) {
    const int n = 2 + int(k % 4);
    auto inst = hyplan::generate_instance(n, hyplan::derive_seed(master, {k}));
    const auto model = hyplan::build_qubo(inst, hyplan::default_penalties(inst));
    if (model.num_variables() <= 20) out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace oracle
