#pragma once

// Simulated-annealing sampler for QuboModel plus an exhaustive oracle, both
// behind the same sampler contract (anything with `SampleSet sample(const
// QuboModel&)`).

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hyplan/qubo.hpp"
#include "hyplan/rng.hpp"

namespace hyplan {

struct SaConfig {
  int num_reads = 1000;
  int sweeps_per_read = 1000;
  // Both zero: derive from the model with auto_beta_range.
  double beta_min = 0.0;
  double beta_max = 0.0;
  std::uint64_t master_seed = 0;
  int threads = 1;

  void check() const {
    if (num_reads < 1) throw std::invalid_argument("num_reads must be >= 1");
    if (sweeps_per_read < 1) throw std::invalid_argument("sweeps_per_read must be >= 1");
    const bool automatic = beta_min == 0.0 && beta_max == 0.0;
    if (!automatic && !(beta_min > 0.0 && beta_min < beta_max))
      throw std::invalid_argument("beta range must satisfy 0 < beta_min < beta_max");
  }
};

struct SampleRecord {
  Assignment assignment;
  double energy = 0.0;
  std::size_t read_index = 0;
};

struct SampleSet {
  std::vector<SampleRecord> records;  // ascending energy, then read index
  std::string sampler;
  SaConfig config;
  double beta_min = 0.0;
  double beta_max = 0.0;
  double wall_seconds = 0.0;

  [[nodiscard]] bool empty() const noexcept { return records.empty(); }
  [[nodiscard]] const SampleRecord& best() const { return records.at(0); }

  void sort() {
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
      if (a.energy != b.energy) return a.energy < b.energy;
      return a.read_index < b.read_index;
    });
  }
};

template <class S>
concept Sampler = requires(const S& s, const QuboModel& m) {
  { s.sample(m) } -> std::same_as<SampleSet>;
};

// Compressed adjacency of the coupling graph.
struct CouplingGraph {
  std::vector<std::size_t> start;  // n + 1
  std::vector<std::size_t> neighbor;
  std::vector<double> coeff;

  explicit CouplingGraph(const QuboModel& m) {
    const auto n = m.num_variables();
    std::vector<std::size_t> degree(n, 0);
    for (const auto& t : m.quadratic) {
      ++degree[t.i];
      ++degree[t.j];
    }
    start.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) start[i + 1] = start[i] + degree[i];
    neighbor.resize(start[n]);
    coeff.resize(start[n]);
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (const auto& t : m.quadratic) {
      neighbor[fill[t.i]] = t.j;
      coeff[fill[t.i]++] = t.coeff;
      neighbor[fill[t.j]] = t.i;
      coeff[fill[t.j]++] = t.coeff;
    }
  }
};

// Energy change of flipping variable i given its local field
// field_i = linear_i + sum_j u_ij q_j.
inline double flip_delta(std::uint8_t bit, double field) { return bit ? -field : field; }

// beta_min = ln 2 / dE_max and beta_max = ln 100 / dE_min, where dE_max is the
// largest row sum of |Q| and dE_min the smallest nonzero |coefficient|.
inline std::pair<double, double> auto_beta_range(const QuboModel& m) {
  const auto n = m.num_variables();
  std::vector<double> row(n, 0.0);
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    row[i] += std::abs(m.linear[i]);
    if (m.linear[i] != 0.0) smallest = std::min(smallest, std::abs(m.linear[i]));
  }
  for (const auto& t : m.quadratic) {
    row[t.i] += std::abs(t.coeff);
    row[t.j] += std::abs(t.coeff);
    smallest = std::min(smallest, std::abs(t.coeff));
  }
  const double largest = n ? *std::max_element(row.begin(), row.end()) : 0.0;
  if (largest == 0.0) return {1.0, 10.0};
  return {std::numbers::ln2 / largest, std::log(100.0) / smallest};
}

namespace detail {

inline double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline SampleRecord anneal_one_read(const QuboModel& model, const CouplingGraph& graph,
                                    const std::vector<double>& betas, std::uint64_t master_seed,
                                    std::size_t read_index) {
  const auto n = model.num_variables();
  Rng rng = make_rng(derive_seed(master_seed, {read_index}));
  Assignment state(n);
  for (auto& b : state) b = static_cast<std::uint8_t>(rng() >> 63);

  std::vector<double> field(model.linear);
  for (std::size_t i = 0; i < n; ++i)
    if (state[i])
      for (auto k = graph.start[i]; k < graph.start[i + 1]; ++k) field[graph.neighbor[k]] += graph.coeff[k];

  for (double beta : betas) {
    for (std::size_t i = 0; i < n; ++i) {
      const double de = flip_delta(state[i], field[i]);
      bool accept = de <= 0.0;
      if (!accept) {
        const double x = beta * de;
        accept = x < 40.0 && unit_uniform(rng) < std::exp(-x);
      }
      if (!accept) continue;
      state[i] ^= 1;
      const double sign = state[i] ? 1.0 : -1.0;
      for (auto k = graph.start[i]; k < graph.start[i + 1]; ++k)
        field[graph.neighbor[k]] += sign * graph.coeff[k];
    }
  }
  SampleRecord rec;
  rec.energy = energy(model, state);
  rec.assignment = std::move(state);
  rec.read_index = read_index;
  return rec;
}

}  // namespace detail

// Runs reads [first_read, first_read + count). Each read is seeded from
// (master_seed, read_index) alone, so chunked calls concatenate to the
// same set as one call.
inline SampleSet sample_reads(const QuboModel& model, const SaConfig& cfg, std::size_t first_read,
                              std::size_t count) {
  cfg.check();
  if (model.num_variables() == 0) throw std::invalid_argument("cannot sample a QUBO with no variables");
  const auto t0 = std::chrono::steady_clock::now();

  SampleSet out;
  out.sampler = "simulated-annealing";
  out.config = cfg;
  if (cfg.beta_min == 0.0 && cfg.beta_max == 0.0) {
    std::tie(out.beta_min, out.beta_max) = auto_beta_range(model);
  } else {
    out.beta_min = cfg.beta_min;
    out.beta_max = cfg.beta_max;
  }

  std::vector<double> betas(static_cast<std::size_t>(cfg.sweeps_per_read));
  if (betas.size() == 1) {
    betas[0] = out.beta_max;
  } else {
    const double ratio = out.beta_max / out.beta_min;
    for (std::size_t s = 0; s < betas.size(); ++s)
      betas[s] = out.beta_min * std::pow(ratio, double(s) / double(betas.size() - 1));
  }

  const CouplingGraph graph(model);
  out.records.resize(count);
  const auto workers = static_cast<std::size_t>(std::clamp(cfg.threads, 1, 256));
  if (workers == 1 || count < 2) {
    for (std::size_t r = 0; r < count; ++r)
      out.records[r] = detail::anneal_one_read(model, graph, betas, cfg.master_seed, first_read + r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w)
      pool.emplace_back([&] {
        for (auto r = next++; r < count; r = next++)
          out.records[r] = detail::anneal_one_read(model, graph, betas, cfg.master_seed, first_read + r);
      });
  }
  out.sort();
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline SampleSet sample(const QuboModel& model, const SaConfig& cfg) {
  return sample_reads(model, cfg, 0, static_cast<std::size_t>(cfg.num_reads));
}

inline void append(SampleSet& into, SampleSet&& more) {
  for (auto& r : more.records) into.records.push_back(std::move(r));
  into.wall_seconds += more.wall_seconds;
  into.sort();
}

inline constexpr std::size_t kBruteForceLimit = 24;

struct GroundState {
  Assignment assignment;
  double energy = 0.0;
};

// Exact minimum by enumerating assignments in lexicographic order (variable 0
// most significant); the first minimum found wins ties.
inline GroundState brute_force_solve(const QuboModel& model) {
  const auto n = model.num_variables();
  if (n > kBruteForceLimit)
    throw std::invalid_argument("brute force refused: " + std::to_string(n) +
                                " variables exceeds the limit of " +
                                std::to_string(kBruteForceLimit));
  GroundState best{Assignment(n, 0), 0.0};
  if (n == 0) {
    best.energy = model.offset;
    return best;
  }

  double scale = std::abs(model.offset);
  for (double v : model.linear) scale += std::abs(v);
  for (const auto& t : model.quadratic) scale += std::abs(t.coeff);
  const double tol = 1e-11 * (1.0 + scale);

  const CouplingGraph graph(model);
  Assignment state(n, 0);
  std::vector<double> field(model.linear);
  auto flip = [&](std::size_t i) {
    state[i] ^= 1;
    const double sign = state[i] ? 1.0 : -1.0;
    for (auto k = graph.start[i]; k < graph.start[i + 1]; ++k)
      field[graph.neighbor[k]] += sign * graph.coeff[k];
  };

  double e = 0.0;  // without offset
  double best_e = 0.0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    // k-1 -> k clears the trailing ones and sets the next bit; bit b of k is
    // variable n-1-b.
    const auto trailing = static_cast<std::size_t>(std::countr_one(k - 1));
    for (std::size_t b = 0; b <= trailing; ++b) {
      const auto var = n - 1 - b;
      e += flip_delta(state[var], field[var]);
      flip(var);
    }
    if (e < best_e - tol) {
      best_e = e;
      best.assignment = state;
    }
  }
  best.energy = energy(model, best.assignment);
  return best;
}

// Sampler wrappers.

struct AnnealingSampler {
  SaConfig config;
  [[nodiscard]] SampleSet sample(const QuboModel& m) const { return hyplan::sample(m, config); }
};

struct ExhaustiveSampler {
  [[nodiscard]] SampleSet sample(const QuboModel& m) const {
    const auto t0 = std::chrono::steady_clock::now();
    auto gs = brute_force_solve(m);
    SampleSet out;
    out.sampler = "exhaustive";
    out.records.push_back({std::move(gs.assignment), gs.energy, 0});
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }
};

// Text exchange with external samplers: one "energy bit-string" per line.
// Energies in imported files are ignored and recomputed against the model,
// because external samplers commonly drop the constant offset.
inline void write_samples_text(const SampleSet& s, std::ostream& os) {
  os.precision(17);
  for (const auto& r : s.records) {
    os << r.energy << ' ';
    for (auto b : r.assignment) os << (b ? '1' : '0');
    os << '\n';
  }
}

inline SampleSet read_samples_text(std::istream& is, const QuboModel& model) {
  SampleSet out;
  out.sampler = "imported";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double claimed = 0.0;
    std::string bits;
    if (!(ls >> claimed >> bits)) throw ParseError("samples line " + std::to_string(lineno) + ": expected 'energy bit-string'");
    if (bits.size() != model.num_variables())
      throw ParseError("samples line " + std::to_string(lineno) + ": bit-string has " +
                       std::to_string(bits.size()) + " bits, model has " +
                       std::to_string(model.num_variables()));
    Assignment a(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != '0' && bits[i] != '1')
        throw ParseError("samples line " + std::to_string(lineno) + ": invalid bit character");
      a[i] = bits[i] == '1';
    }
    const double e = energy(model, a);
    out.records.push_back({std::move(a), e, out.records.size()});
  }
  out.sort();
  return out;
}

struct ImportedSampler {
  SampleSet samples;
  [[nodiscard]] SampleSet sample(const QuboModel&) const { return samples; }
};

static_assert(Sampler<AnnealingSampler>);
static_assert(Sampler<ExhaustiveSampler>);
static_assert(Sampler<ImportedSampler>);

}  // namespace hyplan
