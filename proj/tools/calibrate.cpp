// Measures the single-core throughputs behind Work-mode budgets: annealing
// flip proposals per second and baseline search nodes per second. The values
// printed here are the ones frozen in include/hyplan/budget.hpp.

#include <chrono>
#include <cstdio>

#include "hyplan.hpp"

int main() {
  using clock = std::chrono::steady_clock;
  using namespace hyplan;

  double flips = 0.0, sa_seconds = 0.0;
  double nodes = 0.0, search_seconds = 0.0;
  for (int n : {6, 8, 10, 12}) {
    for (int i = 1; i <= 3; ++i) {
      const auto inst = generate_instance(n, instance_seed(0, n, i));
      const auto model = build_qubo(inst, default_penalties(inst));
      SaConfig sa;
      sa.num_reads = 40;
      sa.master_seed = 1;
      const auto t0 = clock::now();
      const auto set = sample(model, sa);
      sa_seconds += std::chrono::duration<double>(clock::now() - t0).count();
      flips += double(set.records.size()) * sa.sweeps_per_read * double(model.num_variables());

      MonolithicConfig mc;
      mc.time_budget = 0.25;
      mc.budget_mode = BudgetMode::Wall;
      const auto t1 = clock::now();
      const auto pool = solve_monolithic(inst, mc);
      search_seconds += std::chrono::duration<double>(clock::now() - t1).count();
      nodes += double(pool.stats.nodes);
    }
  }
  std::printf("sa_flips_per_second %.4g\n", flips / sa_seconds);
  std::printf("search_nodes_per_second %.4g\n", nodes / search_seconds);
  return 0;
}
