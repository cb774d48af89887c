#pragma once

// Resource-allocation QUBO: compiles the allocation model into a penalty
// Hamiltonian
//
//   H = H_filling + l_deadline H_deadline + l_onehot H_onehot
//       + l_capacity H_capacity + l_xy H_xy
//
// over binary variables x(c,i,j,l) (task (c,i) placed in melt l of resource j)
// and y(c,j,l) (melt used). Energies are E(q) = sum_i d_i q_i
// + sum_{i<j} u_ij q_i q_j + offset, with all assignment-independent constants
// collected in `offset`.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hyplan/instance.hpp"

namespace hyplan {

using Assignment = std::vector<std::uint8_t>;

enum class VarKind : std::uint8_t { X, Y };

// Structured identity of one binary variable. All fields are positions into
// the instance vectors (not ids); `task` is -1 for Y variables.
struct VarTag {
  VarKind kind = VarKind::X;
  int cluster = 0;
  int task = -1;
  int resource = 0;
  int copy = 0;

  friend auto operator<=>(const VarTag&, const VarTag&) = default;
};

class VariableMap {
 public:
  VariableMap() = default;

  explicit VariableMap(const ProblemInstance& inst) {
    // Per (c, j, l): Y first, then the X of every task in cluster c.
    for (std::size_t c = 0; c < inst.clusters.size(); ++c)
      for (std::size_t j = 0; j < inst.resources.size(); ++j)
        for (int l = 0; l < inst.virtual_copies[c][j]; ++l) {
          add({VarKind::Y, int(c), -1, int(j), l});
          for (std::size_t i = 0; i < inst.clusters[c].tasks.size(); ++i)
            add({VarKind::X, int(c), int(i), int(j), l});
        }
  }

  [[nodiscard]] std::size_t size() const noexcept { return tags_.size(); }
  [[nodiscard]] const VarTag& tag(std::size_t index) const { return tags_.at(index); }
  [[nodiscard]] const std::vector<VarTag>& tags() const noexcept { return tags_; }

  [[nodiscard]] std::size_t index(const VarTag& tag) const {
    auto it = index_.find(tag);
    if (it == index_.end()) throw std::out_of_range("unknown QUBO variable");
    return it->second;
  }
  [[nodiscard]] std::size_t x(int c, int i, int j, int l) const {
    return index({VarKind::X, c, i, j, l});
  }
  [[nodiscard]] std::size_t y(int c, int j, int l) const { return index({VarKind::Y, c, -1, j, l}); }

 private:
  void add(VarTag t) {
    index_.emplace(t, tags_.size());
    tags_.push_back(t);
  }

  std::vector<VarTag> tags_;
  std::map<VarTag, std::size_t> index_;
};

struct PenaltyConfig {
  double lambda_deadline = 0.0;
  double lambda_one_hot = 1.0;
  double lambda_capacity = 1.0;
  double lambda_xy = 1.0;
  double alpha = 0.95;

  void check() const {
    if (lambda_deadline < 0 || lambda_one_hot < 0 || lambda_capacity < 0 || lambda_xy < 0)
      throw std::invalid_argument("penalty weights must be non-negative");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  }
};

struct QuboTerm {
  std::size_t i = 0;
  std::size_t j = 0;  // i < j
  double coeff = 0.0;
};

struct QuboModel {
  std::vector<double> linear;   // diagonal
  std::vector<QuboTerm> quadratic;  // upper triangle, sorted by (i, j)
  double offset = 0.0;
  VariableMap variables;
  PenaltyConfig penalties;

  [[nodiscard]] std::size_t num_variables() const noexcept { return linear.size(); }
  [[nodiscard]] std::size_t num_terms() const {
    return quadratic.size() +
           static_cast<std::size_t>(std::count_if(linear.begin(), linear.end(),
                                                  [](double v) { return v != 0.0; }));
  }
};

inline constexpr double kDropThreshold = 1e-12;

// Accumulates upper-triangle coefficients before they are frozen into a QuboModel.
class QuboBuilder {
 public:
  explicit QuboBuilder(std::size_t n) : linear_(n, 0.0) {}

  void add_linear(std::size_t i, double v) { linear_.at(i) += v; }
  void add_pair(std::size_t i, std::size_t j, double v) {
    if (i == j) {
      linear_.at(i) += v;  // q^2 = q
      return;
    }
    if (i > j) std::swap(i, j);
    pairs_[{i, j}] += v;
  }
  void add_offset(double v) { offset_ += v; }

  QuboModel finish(VariableMap vars, PenaltyConfig cfg) && {
    QuboModel m;
    m.linear = std::move(linear_);
    for (auto& v : m.linear)
      if (std::abs(v) < kDropThreshold) v = 0.0;
    for (const auto& [key, v] : pairs_)
      if (std::abs(v) >= kDropThreshold) m.quadratic.push_back({key.first, key.second, v});
    m.offset = offset_;
    m.variables = std::move(vars);
    m.penalties = cfg;
    return m;
  }

 private:
  std::vector<double> linear_;
  std::map<std::pair<std::size_t, std::size_t>, double> pairs_;
  double offset_ = 0.0;
};

// Auto-scaled penalty weights: constraint terms dominate every one-bit
// objective incentive.
inline PenaltyConfig default_penalties(const ProblemInstance& inst) {
  require_valid(inst);
  int spread = 0;
  for (const auto& c : inst.clusters) {
    auto [lo, hi] = std::minmax_element(c.tasks.begin(), c.tasks.end(),
                                        [](const Task& a, const Task& b) {
                                          return a.due_date < b.due_date;
                                        });
    spread = std::max(spread, hi->due_date - lo->due_date);
  }
  const double d = spread > 0 ? spread : 1.0;  // D = 0 would make the weight infinite
  const double n = static_cast<double>(inst.num_tasks());

  PenaltyConfig cfg;
  cfg.lambda_deadline = 1.0 / (2.0 * d * d * n);

  // Largest one-bit gain: a y flip changes H_filling by 1; an x flip with every
  // other task of its cluster in the same melt changes H_deadline by
  // 2 * sum_k (S_i - S_k)^2.
  double gain = 1.0;
  for (const auto& c : inst.clusters)
    for (const auto& ti : c.tasks) {
      double s = 0.0;
      for (const auto& tk : c.tasks) s += double(ti.due_date - tk.due_date) * (ti.due_date - tk.due_date);
      gain = std::max(gain, cfg.lambda_deadline * 2.0 * s);
    }
  int max_capacity = 0;
  for (const auto& r : inst.resources) max_capacity = std::max(max_capacity, r.capacity);

  cfg.lambda_one_hot = 2.0 * (gain + 1.0);
  cfg.lambda_xy = 2.0 * (gain + 1.0);
  cfg.lambda_capacity = (gain + 1.0) / (double(max_capacity) * max_capacity);
  cfg.alpha = 0.95;
  return cfg;
}

inline QuboModel build_qubo(const ProblemInstance& inst, const PenaltyConfig& cfg) {
  require_valid(inst);
  cfg.check();
  VariableMap vars(inst);
  QuboBuilder q(vars.size());

  for (std::size_t c = 0; c < inst.clusters.size(); ++c) {
    const auto& tasks = inst.clusters[c].tasks;
    const int n_c = static_cast<int>(tasks.size());

    for (std::size_t j = 0; j < inst.resources.size(); ++j) {
      const double target = cfg.alpha * inst.resources[j].capacity;
      for (int l = 0; l < inst.virtual_copies[c][j]; ++l) {
        const auto y = vars.y(int(c), int(j), l);

        // H_filling
        q.add_linear(y, 1.0);

        // H_deadline over ordered pairs (i, k): each unordered pair twice.
        for (int i = 0; i < n_c; ++i)
          for (int k = i + 1; k < n_c; ++k) {
            const double diff = tasks[i].due_date - tasks[k].due_date;
            q.add_pair(vars.x(int(c), i, int(j), l), vars.x(int(c), k, int(j), l),
                       cfg.lambda_deadline * 2.0 * diff * diff);
          }

        // H_capacity: (sum_i w_i x_i - target y)^2
        const double lc = cfg.lambda_capacity;
        for (int i = 0; i < n_c; ++i) {
          const double wi = tasks[i].weight;
          const auto xi = vars.x(int(c), i, int(j), l);
          q.add_linear(xi, lc * wi * wi);
          for (int k = i + 1; k < n_c; ++k)
            q.add_pair(xi, vars.x(int(c), k, int(j), l), lc * 2.0 * wi * tasks[k].weight);
          q.add_pair(xi, y, -lc * 2.0 * target * wi);
        }
        q.add_linear(y, lc * target * target);

        // H_xy: (y - x - 1/2)^2 = 2x - 2xy + 1/4 on binaries
        for (int i = 0; i < n_c; ++i) {
          const auto xi = vars.x(int(c), i, int(j), l);
          q.add_linear(xi, 2.0 * cfg.lambda_xy);
          q.add_pair(xi, y, -2.0 * cfg.lambda_xy);
          q.add_offset(0.25 * cfg.lambda_xy);
        }
      }
    }

    // H_onehot: (sum_{j,l} x - 1)^2 = -sum x + 2 sum_{a<b} x_a x_b + 1
    for (int i = 0; i < n_c; ++i) {
      std::vector<std::size_t> slots;
      for (std::size_t j = 0; j < inst.resources.size(); ++j)
        for (int l = 0; l < inst.virtual_copies[c][j]; ++l)
          slots.push_back(vars.x(int(c), i, int(j), l));
      for (std::size_t a = 0; a < slots.size(); ++a) {
        q.add_linear(slots[a], -cfg.lambda_one_hot);
        for (std::size_t b = a + 1; b < slots.size(); ++b)
          q.add_pair(slots[a], slots[b], 2.0 * cfg.lambda_one_hot);
      }
      q.add_offset(cfg.lambda_one_hot);
    }
  }
  return std::move(q).finish(std::move(vars), cfg);
}

inline double energy(const QuboModel& model, std::span<const std::uint8_t> assignment) {
  if (assignment.size() != model.num_variables())
    throw std::invalid_argument("assignment length " + std::to_string(assignment.size()) +
                                " does not match " + std::to_string(model.num_variables()) +
                                " QUBO variables");
  double e = 0.0;
  for (std::size_t i = 0; i < model.linear.size(); ++i)
    if (assignment[i]) e += model.linear[i];
  for (const auto& t : model.quadratic)
    if (assignment[t.i] && assignment[t.j]) e += t.coeff;
  return e + model.offset;
}

// ---------------------------------------------------------------------------
// Decoding

struct Batch {
  int cluster = 0;
  int resource = 0;
  int copy = 0;
  std::vector<int> members;  // task positions within the cluster, ascending

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct TaskRef {
  int cluster = 0;
  int task = 0;

  friend auto operator<=>(const TaskRef&, const TaskRef&) = default;
};

struct Allocation {
  std::vector<Batch> batches;
  std::vector<TaskRef> unassigned_tasks;
  std::string source;

  // Batch index per task, -1 when unassigned.
  [[nodiscard]] std::vector<std::vector<int>> batch_of(const ProblemInstance& inst) const {
    std::vector<std::vector<int>> where(inst.clusters.size());
    for (std::size_t c = 0; c < inst.clusters.size(); ++c)
      where[c].assign(inst.clusters[c].tasks.size(), -1);
    for (std::size_t b = 0; b < batches.size(); ++b)
      for (int m : batches[b].members) where.at(batches[b].cluster).at(m) = int(b);
    return where;
  }
};

// Label-free identity: per (cluster, resource), the sorted list of member sets.
inline std::vector<std::vector<int>> canonical_key(const Allocation& a) {
  std::vector<std::vector<int>> key;
  for (const auto& b : a.batches) {
    std::vector<int> k{b.cluster, b.resource};
    k.insert(k.end(), b.members.begin(), b.members.end());
    key.push_back(std::move(k));
  }
  std::sort(key.begin(), key.end());
  return key;
}

struct CapacityCheck {
  std::size_t batch = 0;
  int load = 0;
  int bound = 0;
  bool ok = true;
};

struct FeasibilityReport {
  std::vector<std::uint8_t> one_hot_ok;  // flat task order (cluster-major)
  std::vector<CapacityCheck> capacity;
  bool xy_link_ok = true;
  bool overall = true;
};

inline int batch_load(const Batch& b, const ProblemInstance& inst) {
  int load = 0;
  for (int m : b.members) load += inst.clusters.at(b.cluster).tasks.at(m).weight;
  return load;
}

// Audits one-hot, hard capacity (true B_j, not the soft target) on an allocation.
inline FeasibilityReport audit_allocation(const Allocation& alloc, const ProblemInstance& inst) {
  FeasibilityReport rep;
  std::vector<std::vector<int>> count(inst.clusters.size());
  for (std::size_t c = 0; c < inst.clusters.size(); ++c)
    count[c].assign(inst.clusters[c].tasks.size(), 0);
  for (std::size_t b = 0; b < alloc.batches.size(); ++b) {
    const auto& batch = alloc.batches[b];
    for (int m : batch.members) ++count.at(batch.cluster).at(m);
    CapacityCheck cc;
    cc.batch = b;
    cc.load = batch_load(batch, inst);
    cc.bound = inst.resources.at(batch.resource).capacity;
    cc.ok = cc.load <= cc.bound;
    rep.capacity.push_back(cc);
  }
  for (const auto& row : count)
    for (int k : row) rep.one_hot_ok.push_back(k == 1 ? 1 : 0);
  rep.overall = std::all_of(rep.one_hot_ok.begin(), rep.one_hot_ok.end(), [](auto v) { return v; }) &&
                std::all_of(rep.capacity.begin(), rep.capacity.end(), [](const auto& c) { return c.ok; });
  return rep;
}

inline std::pair<Allocation, FeasibilityReport> decode(const QuboModel& model,
                                                       std::span<const std::uint8_t> assignment,
                                                       const ProblemInstance& inst,
                                                       std::string source = "qubo") {
  if (assignment.size() != model.num_variables())
    throw std::invalid_argument("assignment length does not match the QUBO");
  const auto& vars = model.variables;

  std::vector<std::vector<int>> hits(inst.clusters.size());
  for (std::size_t c = 0; c < inst.clusters.size(); ++c)
    hits[c].assign(inst.clusters[c].tasks.size(), 0);

  Allocation alloc;
  alloc.source = std::move(source);
  bool xy_ok = true;
  std::map<std::tuple<int, int, int>, std::size_t> batch_index;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto& t = vars.tag(v);
    if (t.kind != VarKind::X || !assignment[v]) continue;
    if (!assignment[vars.y(t.cluster, t.resource, t.copy)]) xy_ok = false;
    // A task hit twice stays in its first melt so batches remain disjoint.
    if (hits[t.cluster][t.task]++ > 0) continue;
    auto key = std::make_tuple(t.cluster, t.resource, t.copy);
    auto [it, inserted] = batch_index.try_emplace(key, alloc.batches.size());
    if (inserted) alloc.batches.push_back({t.cluster, t.resource, t.copy, {}});
    alloc.batches[it->second].members.push_back(t.task);
  }
  // Present batches in (c, j, l) order with sorted members.
  std::sort(alloc.batches.begin(), alloc.batches.end(), [](const Batch& a, const Batch& b) {
    return std::tie(a.cluster, a.resource, a.copy) < std::tie(b.cluster, b.resource, b.copy);
  });
  for (auto& b : alloc.batches) std::sort(b.members.begin(), b.members.end());
  for (std::size_t c = 0; c < hits.size(); ++c)
    for (std::size_t i = 0; i < hits[c].size(); ++i)
      if (hits[c][i] == 0) alloc.unassigned_tasks.push_back({int(c), int(i)});

  auto rep = audit_allocation(alloc, inst);
  // Multiply-assigned tasks were dropped from later batches; re-mark them.
  std::size_t flat = 0;
  for (const auto& row : hits)
    for (int k : row) rep.one_hot_ok[flat++] = (k == 1) ? 1 : 0;
  rep.xy_link_ok = xy_ok;
  rep.overall = rep.overall && xy_ok &&
                std::all_of(rep.one_hot_ok.begin(), rep.one_hot_ok.end(), [](auto v) { return v; });
  return {std::move(alloc), std::move(rep)};
}

// ---------------------------------------------------------------------------
// Text export: "n_vars n_terms offset" then "i j coeff" with i <= j.

inline void write_qubo_text(const QuboModel& m, std::ostream& os) {
  os << std::setprecision(17);
  os << m.num_variables() << ' ' << m.num_terms() << ' ' << m.offset << '\n';
  // Interleave diagonal and upper triangle in row-major order.
  std::size_t next = 0;
  for (std::size_t i = 0; i < m.linear.size(); ++i) {
    if (m.linear[i] != 0.0) os << i << ' ' << i << ' ' << m.linear[i] << '\n';
    while (next < m.quadratic.size() && m.quadratic[next].i == i) {
      const auto& t = m.quadratic[next++];
      os << t.i << ' ' << t.j << ' ' << t.coeff << '\n';
    }
  }
}

// Reads coefficients back; the variable map is not part of the text format.
inline QuboModel read_qubo_text(std::istream& is) {
  std::size_t n = 0, terms = 0;
  double offset = 0.0;
  if (!(is >> n >> terms >> offset)) throw ParseError("QUBO text: bad header");
  QuboBuilder b(n);
  for (std::size_t k = 0; k < terms; ++k) {
    std::size_t i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw ParseError("QUBO text: bad term line " + std::to_string(k + 2));
    if (i >= n || j >= n || i > j)
      throw ParseError("QUBO text: index out of range on line " + std::to_string(k + 2));
    if (i == j)
      b.add_linear(i, v);
    else
      b.add_pair(i, j, v);
  }
  b.add_offset(offset);
  return std::move(b).finish(VariableMap{}, PenaltyConfig{});
}

}  // namespace hyplan
