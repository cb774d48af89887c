#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"

using namespace hyplan;

namespace {

// One resource carrying the given batch targets.
ScheduleProblem chain(std::vector<double> targets, int processing, int setup) {
  ScheduleProblem p;
  p.setup_time = {setup};
  p.by_resource.resize(1);
  double max_t = 0.0;
  for (std::size_t b = 0; b < targets.size(); ++b) {
    ScheduledBatch sb;
    sb.copy = int(b);
    sb.processing_time = processing;
    sb.target = targets[b];
    sb.members = {int(b)};
    p.by_resource[0].push_back(b);
    p.batches.push_back(sb);
    max_t = std::max(max_t, targets[b]);
  }
  p.big_m = max_t + double(targets.size()) * (processing + setup) + 1.0;
  p.horizon = p.big_m;
  return p;
}

}  // namespace

TEST_CASE("batch targets") {
  ProblemInstance inst;
  inst.clusters.push_back({0, {{0, 0, 1, 5}, {0, 1, 1, 9}, {0, 2, 1, 9}, {0, 3, 4, 12}}});
  inst.resources.push_back({0, 20, 0, 1});
  inst.virtual_copies = {{4}};
  CHECK(batch_target({0, 0, 0, {0, 1, 2}}, inst, TargetRule::WeightedMedian) == 9.0);
  CHECK(batch_target({0, 0, 0, {3}}, inst, TargetRule::WeightedMedian) == 12.0);
  CHECK(batch_target({0, 0, 0, {0, 3}}, inst, TargetRule::WeightedMedian) == 12.0);
  CHECK(batch_target({0, 0, 0, {0, 3}}, inst, TargetRule::Median) == 5.0);
  CHECK(batch_target({0, 0, 0, {0, 1, 2}}, inst, TargetRule::Mean) == Catch::Approx(23.0 / 3.0));
}

TEST_CASE("big-M bounds every completion") {
  ProblemInstance inst;
  inst.clusters.push_back({0, {{0, 0, 3, 10}, {0, 1, 4, 14}}});
  inst.resources.push_back({0, 20, 0, 1});
  inst.virtual_copies = {{2}};
  Allocation a;
  a.batches = {{0, 0, 0, {0}}, {0, 0, 1, {1}}};
  const auto p = build_schedule_problem(a, inst);
  CHECK(p.big_m >= 14.0 + 2.0);
  Allocation broken = a;
  broken.batches.pop_back();
  broken.unassigned_tasks.push_back({0, 1});
  CHECK_THROWS_AS(build_schedule_problem(broken, inst), std::invalid_argument);
}

TEST_CASE("worked scheduling examples") {
  SECTION("single batch sits on its target") {
    const auto s = solve_schedule(chain({10}, 1, 0));
    CHECK(s.completion[0] == 10.0);
    CHECK(s.objective == 0.0);
  }
  SECTION("single batch cannot finish before its processing time") {
    const auto s = solve_schedule(chain({2}, 5, 0));
    CHECK(s.completion[0] == 5.0);
    CHECK(s.objective == 3.0);
  }
  SECTION("two batches on one target") {
    const auto p = chain({10, 10}, 1, 0);
    const auto s = solve_schedule(p);
    CHECK(s.objective == 1.0);
    CHECK(s.completion == std::vector<double>{9.0, 10.0});
    CHECK(validate_schedule(s, p).ok());
  }
  SECTION("three batches, R=1, T=2, all targets 3") {
    // Pitch 3 chain centred on 3 would need a completion at 0, which the
    // processing-time bound forbids; the earliest feasible shift costs 7.
    const auto p = chain({3, 3, 3}, 1, 2);
    const auto s = solve_schedule(p);
    CHECK(oracle::schedule_grid_optimum(p) == 7.0);
    CHECK(s.objective == 7.0);
    CHECK(validate_schedule(s, p).ok());
  }
}

TEST_CASE("solver matches the grid oracle on random problems") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<int> count(1, 5), target(1, 20), proc(1, 3), setup(0, 2);
    std::vector<double> targets(count(rng));
    for (auto& t : targets) t = target(rng);
    const auto p = chain(targets, proc(rng), setup(rng));
    const auto s = solve_schedule(p);
    CHECK(s.objective == Catch::Approx(oracle::schedule_grid_optimum(p)).margin(1e-6));
    CHECK(validate_schedule(s, p).ok());
    for (double z : s.completion) CHECK(z == std::round(z));
  }
}

TEST_CASE("adding a batch never lowers the optimum") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> target(1, 15);
  std::vector<double> targets{double(target(rng))};
  double last = solve_schedule(chain(targets, 1, 1)).objective;
  for (int k = 0; k < 4; ++k) {
    targets.push_back(target(rng));
    const double now = solve_schedule(chain(targets, 1, 1)).objective;
    CHECK(now >= last - 1e-9);
    last = now;
  }
}

TEST_CASE("relabelling batches keeps the optimum") {
  const auto a = solve_schedule(chain({4, 9, 9, 2}, 2, 1)).objective;
  const auto b = solve_schedule(chain({9, 2, 4, 9}, 2, 1)).objective;
  CHECK(a == b);
}

TEST_CASE("schedule validation findings") {
  const auto p = chain({10, 10}, 1, 0);
  SECTION("valid schedule") { CHECK(validate_schedule(solve_schedule(p), p).ok()); }
  SECTION("overlap names both batches") {
    Schedule s;
    s.completion = {10.0, 10.0};
    s.objective = 0.0;
    const auto r = validate_schedule(s, p);
    REQUIRE_FALSE(r.ok());
    CHECK(r.to_string().find("batch(0,0,0)/batch(0,0,1)") != std::string::npos);
  }
  SECTION("objective mismatch") {
    auto s = solve_schedule(p);
    s.objective = 5.0;
    const auto r = validate_schedule(s, p);
    REQUIRE_FALSE(r.ok());
    CHECK(r.to_string().find("objective") != std::string::npos);
  }
}

TEST_CASE("too many batches on a resource is refused") {
  SchedulerOptions opt;
  opt.max_batches_per_resource = 3;
  CHECK_THROWS_AS(solve_schedule(chain({1, 2, 3, 4}, 1, 0), opt), std::invalid_argument);
}
