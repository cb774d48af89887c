#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"

using namespace hyplan;

namespace {

KpiPoint pt(double fill, double lead) { return {fill, lead, 0}; }

bool same_points(const std::vector<KpiPoint>& a, const std::vector<KpiPoint>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].filling_ratio != b[k].filling_ratio || a[k].lead_time != b[k].lead_time) return false;
  return true;
}

std::vector<KpiPoint> random_front(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0), lead(0.0, 40.0);
  std::vector<KpiPoint> pts;
  for (std::size_t k = 0; k < n; ++k) pts.push_back(pt(u(rng), lead(rng)));
  return pareto_filter(pts);
}

}  // namespace

TEST_CASE("KPIs of hand-built allocations") {
  ProblemInstance inst;
  inst.clusters.push_back({0, {{0, 0, 10, 10}, {0, 1, 8, 12}, {0, 2, 6, 4}}});
  inst.resources.push_back({0, 20, 0, 1});
  inst.virtual_copies = {{3}};
  SECTION("one batch") {
    Allocation a;
    a.batches = {{0, 0, 0, {0, 1}}};
    Schedule s;
    s.completion = {10.0};
    const auto k = kpis(a, s, inst);
    CHECK(k.filling_ratio == 0.9);
    CHECK(k.lead_time == 2.0);
  }
  SECTION("two batches average their fill") {
    Allocation a;
    a.batches = {{0, 0, 0, {0, 1}}, {0, 0, 1, {2}}};
    Schedule s;
    s.completion = {10.0, 4.0};
    CHECK(kpis(a, s, inst).filling_ratio == 0.6);
    KpiOptions min_fill;
    min_fill.fill = FillAggregate::Min;
    CHECK(kpis(a, s, inst, min_fill).filling_ratio == Catch::Approx(0.3));
    KpiOptions mean_lead;
    mean_lead.lead = LeadAggregate::Mean;
    CHECK(kpis(a, s, inst, mean_lead).lead_time == Catch::Approx(2.0 / 3.0));
    SECTION("batch relabelling leaves KPIs unchanged") {
      Allocation b;
      b.batches = {{0, 0, 1, {2}}, {0, 0, 0, {0, 1}}};
      Schedule t;
      t.completion = {4.0, 10.0};
      CHECK(kpis(b, t, inst).filling_ratio == kpis(a, s, inst).filling_ratio);
      CHECK(kpis(b, t, inst).lead_time == kpis(a, s, inst).lead_time);
    }
  }
}

TEST_CASE("mean fill is exact and order independent") {
  CHECK(mean_fill({{18, 20}, {6, 20}}) == 0.6);
  CHECK(mean_fill({{1, 3}, {1, 3}, {1, 3}}) == mean_fill({{1, 3}}));
  CHECK(mean_fill({{7, 20}, {3, 20}, {13, 20}}) == mean_fill({{13, 20}, {7, 20}, {3, 20}}));
  CHECK(mean_fill({}) == 0.0);
}

TEST_CASE("pareto filter") {
  SECTION("trade-off pair survives") {
    CHECK(pareto_filter({pt(0.9, 10), pt(0.8, 5)}).size() == 2);
  }
  SECTION("dominated point is dropped") {
    const auto f = pareto_filter({pt(0.9, 5), pt(0.8, 5)});
    REQUIRE(f.size() == 1);
    CHECK(f[0].filling_ratio == 0.9);
  }
  SECTION("duplicates collapse") { CHECK(pareto_filter({pt(0.5, 3), pt(0.5, 3)}).size() == 1); }
  SECTION("random sets match the quadratic oracle") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> fill(0, 20), lead(0, 30);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<KpiPoint> pts;
      for (int k = 0; k < 100; ++k) pts.push_back(pt(fill(rng) / 20.0, lead(rng)));
      const auto f = pareto_filter(pts);
      CHECK(same_points(f, oracle::quadratic_pareto(pts)));
      for (std::size_t a = 0; a < f.size(); ++a)
        for (std::size_t b = 0; b < f.size(); ++b) CHECK_FALSE(dominates(f[a], f[b]));
    }
  }
}

TEST_CASE("hypervolume edge cases") {
  CHECK(hypervolume({}, 10.0) == 0.0);
  CHECK(hypervolume({pt(1.0, 0.0)}, 10.0) == 1.0);
  CHECK(hypervolume({pt(1.0, 0.0)}, 0.0) == 1.0);
  // Staircase: 0.5 * 0.9 + (0.9 - 0.5) * 0.5.
  CHECK(hypervolume({pt(0.9, 5), pt(0.5, 1)}, 10.0) == Catch::Approx(0.65));
  CHECK_THROWS_AS(hypervolume({pt(0.5, 11)}, 10.0), std::invalid_argument);
}

TEST_CASE("hypervolume matches the Monte Carlo oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto front = random_front(rng, 1 + trial % 8);
    double l_max = 0.0;
    for (const auto& p : front) l_max = std::max(l_max, p.lead_time);
    const auto mc = oracle::mc_hypervolume(front, l_max, 200000, 1000 + trial);
    CHECK(std::abs(hypervolume(front, l_max) - mc.mean) <= 3.0 * mc.sigma + 1e-9);
  }
}

TEST_CASE("hypervolume monotonicity") {
  const std::vector<KpiPoint> base{pt(0.8, 10), pt(0.4, 2)};
  const double hv = hypervolume(base, 20.0);
  auto dominated = base;
  dominated.push_back(pt(0.3, 12));
  CHECK(hypervolume(pareto_filter(dominated), 20.0) == hv);
  auto better = base;
  better.push_back(pt(0.6, 4));
  CHECK(hypervolume(pareto_filter(better), 20.0) > hv);
}

TEST_CASE("front comparison") {
  SECTION("identical pools") {
    const std::vector<KpiPoint> same{pt(0.7, 3), pt(0.2, 6)};
    const auto cmp = compare_fronts({{"a", same}, {"b", same}}, 1);
    REQUIRE(cmp.methods[0].improvement_rate.has_value());
    CHECK(*cmp.methods[0].improvement_rate == 0.0);
    CHECK_FALSE(cmp.methods[1].improvement_rate.has_value());
  }
  SECTION("a dominating front improves") {
    const auto cmp = compare_fronts({{"sep", {pt(0.8, 2)}}, {"base", {pt(0.6, 4), pt(0.3, 10)}}}, 1);
    REQUIRE(cmp.methods[0].improvement_rate.has_value());
    CHECK(*cmp.methods[0].improvement_rate > 0.0);
  }
  SECTION("HVs 0.28 and 0.10 give 180 percent") {
    // Shared L_max = 10 from the baseline's lead 10 point.
    const auto cmp = compare_fronts({{"sep", {pt(0.4, 3)}}, {"base", {pt(0.1, 0), pt(0.05, 10)}}}, 1);
    CHECK(cmp.l_max == 10.0);
    CHECK(cmp.methods[0].hypervolume == Catch::Approx(0.28));
    CHECK(cmp.methods[1].hypervolume == Catch::Approx(0.10));
    CHECK(*cmp.methods[0].improvement_rate == Catch::Approx(1.8));
  }
  SECTION("one method is not a comparison") {
    CHECK_THROWS_AS(compare_fronts({{"a", {pt(0.5, 1)}}}), std::invalid_argument);
  }
}
