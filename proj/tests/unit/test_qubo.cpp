#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace hyplan;

namespace {

ProblemInstance toy(std::vector<std::pair<int, int>> weight_due, int capacity, int copies) {
  ProblemInstance inst;
  Cluster c;
  for (std::size_t i = 0; i < weight_due.size(); ++i)
    c.tasks.push_back({0, int(i), weight_due[i].first, weight_due[i].second});
  inst.clusters.push_back(c);
  inst.resources.push_back({0, capacity, 0, 1});
  inst.virtual_copies = {{copies}};
  return inst;
}

PenaltyConfig unit_penalties(double alpha = 1.0) {
  PenaltyConfig p;
  p.lambda_deadline = 1.0;
  p.lambda_one_hot = 1.0;
  p.lambda_capacity = 1.0;
  p.lambda_xy = 1.0;
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST_CASE("variable map puts Y before the X bits of each melt") {
  const auto inst = toy({{2, 5}, {3, 6}}, 20, 2);
  const VariableMap vars(inst);
  REQUIRE(vars.size() == 6);
  CHECK(vars.y(0, 0, 0) == 0);
  CHECK(vars.x(0, 0, 0, 0) == 1);
  CHECK(vars.x(0, 1, 0, 0) == 2);
  CHECK(vars.y(0, 0, 1) == 3);
  CHECK_THROWS_AS(vars.x(0, 2, 0, 0), std::out_of_range);
}

TEST_CASE("single-task toy") {
  const auto inst = toy({{5, 10}}, 20, 1);
  SECTION("unit weights: direct substitution") {
    const auto model = build_qubo(inst, unit_penalties());
    REQUIRE(model.num_variables() == 2);
    // Filling 1 + capacity (5 - 20)^2 + xy (-1/2)^2.
    CHECK(energy(model, Assignment{1, 1}) == Catch::Approx(1.0 + 225.0 + 0.25));
    // Empty: one-hot 1 + xy (-1/2)^2, so unit weights favour leaving the task out.
    CHECK(energy(model, Assignment{0, 0}) == Catch::Approx(1.25));
  }
  SECTION("default penalties: ground state fills the melt") {
    const auto model = build_qubo(inst, default_penalties(inst));
    const auto gs = brute_force_solve(model);
    CHECK(gs.assignment == Assignment{1, 1});
    CHECK(decode(model, gs.assignment, inst).second.overall);
  }
}

TEST_CASE("zero assignment energy is the one-hot plus xy floor") {
  for (int n : {1, 4, 6}) {
    const auto inst = generate_instance(n, 17 + n);
    const auto p = default_penalties(inst);
    const auto model = build_qubo(inst, p);
    const Assignment zero(model.num_variables(), 0);
    const double pairs = double(n) * inst.virtual_copies[0][0];
    CHECK(energy(model, zero) == Catch::Approx(p.lambda_one_hot * n + p.lambda_xy * pairs / 4.0));
    CHECK(model.offset == Catch::Approx(energy(model, zero)));
  }
}

TEST_CASE("energy matches the term-by-term reference evaluator") {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution bit(0.5);
  for (int k = 0; k < 5; ++k) {
    const auto inst = generate_instance(3 + k, 100 + k);
    const auto p = default_penalties(inst);
    const auto model = build_qubo(inst, p);
    for (int s = 0; s < 200; ++s) {
      Assignment a(model.num_variables());
      for (auto& b : a) b = bit(rng);
      const double ref = oracle::reference_energy(inst, p, model.variables, a);
      CHECK(energy(model, a) == Catch::Approx(ref).epsilon(1e-9));
    }
  }
}

TEST_CASE("xy violation costs exactly 2 lambda_xy more") {
  const auto inst = toy({{4, 7}}, 20, 1);
  PenaltyConfig p;
  p.lambda_deadline = 0.0;
  p.lambda_one_hot = 0.0;
  p.lambda_capacity = 0.0;
  p.lambda_xy = 3.0;
  const auto model = build_qubo(inst, p);
  const auto x = model.variables.x(0, 0, 0, 0), y = model.variables.y(0, 0, 0);
  auto e = [&](int xv, int yv) {
    Assignment a(2);
    a[x] = std::uint8_t(xv);
    a[y] = std::uint8_t(yv);
    return energy(model, a) - yv;  // strip the filling term
  };
  CHECK(e(1, 0) - e(0, 0) == Catch::Approx(6.0));
  CHECK(e(1, 0) - e(1, 1) == Catch::Approx(6.0));
  CHECK(e(1, 0) - e(0, 1) == Catch::Approx(6.0));
}

TEST_CASE("default penalties") {
  const auto inst = toy({{3, 3}, {4, 30}, {5, 10}}, 20, 2);
  const auto p = default_penalties(inst);
  CHECK(p.lambda_deadline == Catch::Approx(1.0 / (2.0 * 27 * 27 * 3)));
  CHECK(p.alpha == 0.95);
  CHECK(p.lambda_one_hot == p.lambda_xy);
  SECTION("one-hot weight exceeds every one-bit objective gain") {
    PenaltyConfig objective_only = p;
    objective_only.lambda_one_hot = objective_only.lambda_capacity = objective_only.lambda_xy = 0.0;
    const auto m = build_qubo(inst, objective_only);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < (1u << m.num_variables()); ++s) {
      Assignment a(m.num_variables());
      for (std::size_t v = 0; v < a.size(); ++v) a[v] = (s >> v) & 1u;
      const double e0 = energy(m, a);
      for (std::size_t v = 0; v < a.size(); ++v) {
        a[v] ^= 1;
        worst = std::max(worst, std::abs(energy(m, a) - e0));
        a[v] ^= 1;
      }
    }
    CHECK(p.lambda_one_hot > worst);
  }
  SECTION("single task with zero due spread stays finite") {
    const auto q = default_penalties(toy({{2, 9}}, 20, 1));
    for (double v : {q.lambda_deadline, q.lambda_one_hot, q.lambda_capacity, q.lambda_xy}) {
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
    }
  }
}

TEST_CASE("three-task toy ground state is feasible") {
  const auto inst = toy({{2, 5}, {3, 12}, {4, 20}}, 20, 2);
  const auto model = build_qubo(inst, default_penalties(inst));
  REQUIRE(model.num_variables() <= 14);
  const auto naive = oracle::naive_minimum(model);
  const auto gs = brute_force_solve(model);
  CHECK(gs.energy == Catch::Approx(naive.energy));
  for (const auto& a : naive.argmins) CHECK(decode(model, a, inst).second.overall);
}

TEST_CASE("decode reports each violation") {
  const auto inst = toy({{12, 5}, {10, 6}, {3, 9}}, 20, 2);
  const auto model = build_qubo(inst, unit_penalties(0.95));
  const auto& v = model.variables;
  Assignment a(model.num_variables(), 0);

  SECTION("unassigned task") {
    a[v.y(0, 0, 0)] = a[v.x(0, 0, 0, 0)] = a[v.x(0, 2, 0, 0)] = 1;
    const auto [alloc, rep] = decode(model, a, inst);
    CHECK_FALSE(rep.overall);
    CHECK(rep.one_hot_ok == std::vector<std::uint8_t>{1, 0, 1});
    REQUIRE(alloc.unassigned_tasks.size() == 1);
    CHECK(alloc.unassigned_tasks[0].task == 1);
  }
  SECTION("overloaded batch records load and bound") {
    a[v.y(0, 0, 0)] = a[v.x(0, 0, 0, 0)] = a[v.x(0, 1, 0, 0)] = a[v.x(0, 2, 0, 0)] = 1;
    const auto [alloc, rep] = decode(model, a, inst);
    CHECK_FALSE(rep.overall);
    REQUIRE(rep.capacity.size() == 1);
    CHECK_FALSE(rep.capacity[0].ok);
    CHECK(rep.capacity[0].load == 25);
    CHECK(rep.capacity[0].bound == 20);
  }
  SECTION("x without y breaks the link") {
    a[v.x(0, 0, 0, 0)] = a[v.x(0, 1, 0, 1)] = a[v.x(0, 2, 0, 1)] = 1;
    a[v.y(0, 0, 1)] = 1;
    const auto [alloc, rep] = decode(model, a, inst);
    CHECK_FALSE(rep.xy_link_ok);
    CHECK_FALSE(rep.overall);
  }
  SECTION("feasible assignment") {
    a[v.y(0, 0, 0)] = a[v.x(0, 0, 0, 0)] = a[v.x(0, 2, 0, 0)] = 1;
    a[v.y(0, 0, 1)] = a[v.x(0, 1, 0, 1)] = 1;
    const auto [alloc, rep] = decode(model, a, inst);
    CHECK(rep.overall);
    REQUIRE(alloc.batches.size() == 2);
    CHECK(alloc.batches[0].members == std::vector<int>{0, 2});
    CHECK(alloc.batches[1].members == std::vector<int>{1});
  }
  SECTION("wrong length is rejected") {
    CHECK_THROWS_AS(decode(model, Assignment(3, 0), inst), std::invalid_argument);
  }
}

TEST_CASE("build_qubo is deterministic") {
  const auto inst = generate_instance(6, 3);
  const auto p = default_penalties(inst);
  std::ostringstream a, b;
  write_qubo_text(build_qubo(inst, p), a);
  write_qubo_text(build_qubo(inst, p), b);
  CHECK(a.str() == b.str());
}

TEST_CASE("QUBO text round trip preserves energies") {
  const auto inst = generate_instance(5, 11);
  const auto model = build_qubo(inst, default_penalties(inst));
  std::stringstream ss;
  write_qubo_text(model, ss);
  const auto back = read_qubo_text(ss);
  REQUIRE(back.num_variables() == model.num_variables());
  std::mt19937_64 rng(3);
  std::bernoulli_distribution bit(0.5);
  for (int s = 0; s < 50; ++s) {
    Assignment a(model.num_variables());
    for (auto& x : a) x = bit(rng);
    CHECK(energy(back, a) == Catch::Approx(energy(model, a)).epsilon(1e-12));
  }
  std::istringstream bad("3 1 0\n2 1 1.0\n");
  CHECK_THROWS_AS(read_qubo_text(bad), ParseError);
}
