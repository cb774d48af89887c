#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace hyplan;

namespace {

QuboModel diag(std::vector<double> d, double offset = 0.0) {
  QuboBuilder b(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) b.add_linear(i, d[i]);
  b.add_offset(offset);
  return std::move(b).finish(VariableMap{}, PenaltyConfig{});
}

QuboModel random_model(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::bernoulli_distribution keep(0.4);
  QuboBuilder b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.add_linear(i, coeff(rng));
    for (std::size_t j = i + 1; j < n; ++j)
      if (keep(rng)) b.add_pair(i, j, coeff(rng));
  }
  b.add_offset(coeff(rng));
  return std::move(b).finish(VariableMap{}, PenaltyConfig{});
}

SaConfig small_config(std::uint64_t seed) {
  SaConfig c;
  c.num_reads = 50;
  c.sweeps_per_read = 200;
  c.master_seed = seed;
  return c;
}

}  // namespace

TEST_CASE("brute force: trivial models") {
  SECTION("zero matrix ties break to all zeros") {
    const auto gs = brute_force_solve(diag({0.0, 0.0, 0.0}, 1.5));
    CHECK(gs.assignment == Assignment{0, 0, 0});
    CHECK(gs.energy == 1.5);
  }
  SECTION("independent bits") {
    const auto gs = brute_force_solve(diag({1.0, -1.0}));
    CHECK(gs.assignment == Assignment{0, 1});
    CHECK(gs.energy == -1.0);
  }
  SECTION("size limit") {
    CHECK_THROWS_AS(brute_force_solve(diag(std::vector<double>(kBruteForceLimit + 1, 1.0))),
                    std::invalid_argument);
  }
}

TEST_CASE("brute force agrees with plain enumeration") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = random_model(4 + s % 9, 500 + s);
    const auto naive = oracle::naive_minimum(m);
    const auto gs = brute_force_solve(m);
    CHECK(gs.energy == Catch::Approx(naive.energy).margin(1e-9));
    CHECK(gs.assignment == naive.argmins.front());
  }
}

TEST_CASE("auto beta range") {
  CHECK(auto_beta_range(diag({0.0, 0.0})) == std::pair{1.0, 10.0});
  const auto [lo, hi] = auto_beta_range(diag({1.0, -1.0}));
  CHECK(lo == Catch::Approx(std::numbers::ln2));
  CHECK(hi == Catch::Approx(std::log(100.0)));
  const auto [lo10, hi10] = auto_beta_range(diag({10.0, -10.0}));
  CHECK(lo10 == Catch::Approx(lo / 10.0));
  CHECK(hi10 == Catch::Approx(hi / 10.0));
}

TEST_CASE("SA on flat and separable landscapes") {
  const auto flat = sample(diag({0.0, 0.0, 0.0}, 2.0), small_config(1));
  for (const auto& r : flat.records) CHECK(r.energy == 2.0);
  const auto sep = sample(diag({1.0, -1.0}), small_config(2));
  CHECK(sep.best().assignment == Assignment{0, 1});
  CHECK(sep.best().energy == -1.0);
}

TEST_CASE("SA finds the ground state of small random models") {
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = random_model(6 + s % 15, 900 + s);
    const auto gs = brute_force_solve(m);
    const auto set = sample(m, small_config(s));
    for (const auto& r : set.records) CHECK(r.energy >= gs.energy - 1e-9);
    if (set.best().energy <= gs.energy + 1e-9) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("SA is deterministic and honest") {
  const auto m = random_model(16, 42);
  auto cfg = small_config(77);
  const auto a = sample(m, cfg);
  cfg.threads = 4;
  const auto b = sample(m, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].assignment == b.records[k].assignment);
    CHECK(a.records[k].read_index == b.records[k].read_index);
    CHECK(a.records[k].energy == energy(m, a.records[k].assignment));
  }
  SECTION("chunked reads concatenate to one call") {
    cfg.threads = 1;
    auto first = sample_reads(m, cfg, 0, 20);
    append(first, sample_reads(m, cfg, 20, 30));
    REQUIRE(first.records.size() == a.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k)
      CHECK(first.records[k].assignment == a.records[k].assignment);
  }
}

TEST_CASE("SA config validation") {
  SaConfig c;
  c.num_reads = 0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = SaConfig{};
  c.beta_min = 2.0;
  c.beta_max = 1.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
}

TEST_CASE("sample text exchange recomputes energies") {
  const auto m = random_model(8, 5);
  const auto set = sample(m, small_config(9));
  std::stringstream ss;
  write_samples_text(set, ss);
  const auto back = read_samples_text(ss, m);
  REQUIRE(back.records.size() == set.records.size());
  for (std::size_t k = 0; k < set.records.size(); ++k) {
    CHECK(back.records[k].energy == set.records[k].energy);
    CHECK(back.records[k].assignment == set.records[k].assignment);
  }
  std::istringstream lying("0 11111111\n");
  CHECK(read_samples_text(lying, m).best().energy == energy(m, Assignment(8, 1)));
  std::istringstream short_bits("0 101\n");
  CHECK_THROWS_AS(read_samples_text(short_bits, m), ParseError);
  std::istringstream bad_char("0 1010x010\n");
  CHECK_THROWS_AS(read_samples_text(bad_char, m), ParseError);
}

TEST_CASE("exhaustive sampler wraps the oracle") {
  const auto m = random_model(10, 3);
  const auto set = ExhaustiveSampler{}.sample(m);
  REQUIRE(set.records.size() == 1);
  CHECK(set.best().energy == brute_force_solve(m).energy);
}
