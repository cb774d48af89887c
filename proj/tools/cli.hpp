#pragma once

// The hyplan command line. Kept in a header so tests can drive the exact same
// code path in-process; tools/hyplan.cpp only forwards main() here.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 I/O failure,
// 4 the run produced an empty result.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplan.hpp"

namespace hyplan::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kIo = 3;
inline constexpr int kEmpty = 4;

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline ojson parse_json_file(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out;
  int threads = 1;
  std::string budget_mode;
  bool print_config = false;
};

// defaults <- config file <- explicit flags
inline RunConfig resolve_config(const Globals& g, const CLI::App& app) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    const auto doc = parse_json_file(g.config_path);
    apply_json(cfg, doc);
  }
  if (app.count("--seed")) cfg.seed = g.seed;
  if (app.count("--out")) cfg.out = g.out;
  if (app.count("--threads")) cfg.threads = g.threads;
  if (app.count("--budget-mode")) {
    try {
      cfg.budget_mode = budget_mode_from_string(g.budget_mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  int size = 0;
  int count = 10;
};

inline int cmd_generate(const RunConfig& cfg, const GenerateArgs& a, std::ostream& out) {
  if (a.size < 1) throw UsageError("--size must be >= 1");
  if (a.count < 1) throw UsageError("--count must be >= 1");
  ojson manifest;
  manifest["command"] = {{"name", "generate"}, {"size", a.size}, {"count", a.count}};
  manifest["config"] = provenance_json(cfg);
  auto files = ojson::array();
  for (int i = 1; i <= a.count; ++i) {
    const auto seed = instance_seed(cfg.seed, a.size, i);
    const auto inst = generate_instance(a.size, seed, cfg.generator);
    const std::string name = "inst_s" + std::to_string(a.size) + "_i" + std::to_string(i) + ".json";
    write_text(fs::path(cfg.out) / name, instance_to_string(inst));
    files.push_back({{"file", name}, {"instance_seed", seed}, {"tasks", inst.num_tasks()}});
    out << name << " seed=" << seed << " tasks=" << inst.num_tasks() << " total_weight=" << inst.total_weight(0)
        << '\n';
  }
  manifest["files"] = std::move(files);
  write_text(fs::path(cfg.out) / ("manifest_s" + std::to_string(a.size) + ".json"), manifest.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string instance;
  std::string method = "separation-sa";
  std::string samples;
  std::string export_qubo;
  std::string export_lp;
};

inline int cmd_solve(const RunConfig& cfg, const SolveArgs& a, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> methods{"separation-sa", "non-separation", "separation-import"};
  if (std::find(methods.begin(), methods.end(), a.method) == methods.end())
    throw UsageError("unknown method '" + a.method + "' (expected separation-sa|non-separation|separation-import)");
  if (a.method == "separation-import" && a.samples.empty())
    throw UsageError("separation-import: external sampler required (pass --samples FILE)");
  check(cfg);

  const auto inst = load_instance(a.instance);
  require_valid(inst);
  const auto sep = separation_config(cfg);
  const auto penalties = sep.penalties ? *sep.penalties : default_penalties(inst);

  if (!a.export_qubo.empty()) {
    const auto model = build_qubo(inst, penalties);
    write_text(a.export_qubo, render([&](std::ostream& os) { write_qubo_text(model, os); }));
  }

  SolutionPool pool;
  if (a.method == "separation-sa") {
    pool = run_separation(inst, sep);
  } else if (a.method == "non-separation") {
    pool = solve_monolithic(inst, monolithic_config(cfg), cfg.scheduler, cfg.kpi);
  } else {
    const auto model = build_qubo(inst, penalties);
    std::istringstream in(read_text(a.samples));
    pool = run_separation_import(inst, sep, read_samples_text(in, model));
  }

  ojson doc;
  doc["command"] = {{"name", "solve"}, {"instance", inst.label}, {"method", a.method}};
  doc["config"] = provenance_json(cfg);
  const auto pool_doc = to_json(pool, inst);
  for (const auto& [k, v] : pool_doc.items()) doc[k] = v;
  const fs::path dir(cfg.out);
  write_text(dir / ("pool_" + a.method + ".json"), doc.dump(2) + "\n");

  FrontComparison self;
  self.methods.push_back({a.method, pareto_filter(pool.points()), 0.0, std::nullopt});
  for (const auto& p : pool.points()) self.l_max = std::max(self.l_max, p.lead_time);
  self.methods[0].hypervolume = hypervolume(self.methods[0].front, self.l_max);
  write_text(dir / ("front_" + a.method + ".csv"), render([&](std::ostream& os) {
               os << "# provenance: " << provenance_json(cfg).dump() << '\n';
               write_front_csv(self, os);
             }));

  if (!a.export_lp.empty() && !pool.empty()) {
    const auto problem = build_schedule_problem(pool.entries().front().allocation, inst, cfg.scheduler);
    write_text(a.export_lp, render([&](std::ostream& os) { write_schedule_lp(problem, os); }));
  }

  out << "method " << a.method << ": pool " << pool.size() << ", front " << self.methods[0].front.size()
      << ", reads " << pool.stats.reads_executed << " (feasible " << pool.stats.feasible << ", infeasible "
      << pool.stats.infeasible << ", duplicates " << pool.stats.duplicates << ")\n";
  if (pool.empty()) {
    err << "empty pool: " << pool.stats.diagnostic << '\n';
    return kEmpty;
  }
  for (const auto& p : self.methods[0].front)
    out << "  fill " << fmt_num(p.filling_ratio) << "  lead " << fmt_num(p.lead_time) << '\n';
  out << "hypervolume " << fmt_num(self.methods[0].hypervolume) << " (L_max " << fmt_num(self.l_max) << ")\n";
  err << "warning: this hypervolume uses the pool's own L_max; use 'compare' for cross-method comparisons\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::vector<std::string> pools;
  std::string baseline;
};

inline MethodFront front_from_pool_file(const fs::path& path) {
  const auto doc = parse_json_file(path);
  if (!doc.contains("entries") || !doc["entries"].is_array())
    throw ParseError(path.string() + ": missing 'entries' array");
  MethodFront f;
  f.method = doc.value("method", path.stem().string());
  for (const auto& e : doc["entries"]) {
    try {
      f.points.push_back(
          {e.at("filling_ratio").get<double>(), e.at("lead_time").get<double>(), e.at("id").get<std::size_t>()});
    } catch (const nlohmann::json::exception&) {
      throw ParseError(path.string() + ": entry lacks filling_ratio/lead_time/id");
    }
  }
  return f;
}

inline int cmd_compare(const RunConfig& cfg, const CompareArgs& a, std::ostream& out) {
  if (a.pools.size() < 2) throw UsageError("compare needs at least two --pools");
  std::vector<MethodFront> fronts;
  for (const auto& p : a.pools) fronts.push_back(front_from_pool_file(p));
  // Identical method names (e.g. two runs of one method) get their file stem appended.
  std::map<std::string, int> seen;
  for (const auto& f : fronts) ++seen[f.method];
  for (std::size_t i = 0; i < fronts.size(); ++i)
    if (seen[fronts[i].method] > 1) fronts[i].method += "[" + fs::path(a.pools[i]).stem().string() + "]";

  std::size_t baseline = fronts.size() - 1;
  if (!a.baseline.empty()) {
    auto it = std::find_if(fronts.begin(), fronts.end(), [&](const auto& f) { return f.method == a.baseline; });
    if (it == fronts.end()) throw UsageError("baseline '" + a.baseline + "' is not among the pools");
    baseline = std::size_t(it - fronts.begin());
  }
  const auto cmp = compare_fronts(fronts, baseline);
  const fs::path dir(cfg.out);
  write_text(dir / "comparison.csv", render([&](std::ostream& os) {
               os << "# provenance: " << provenance_json(cfg).dump() << '\n';
               write_front_csv(cmp, os);
             }));
  ojson summary;
  summary["command"] = {{"name", "compare"}, {"pools", a.pools}};
  summary["config"] = provenance_json(cfg);
  const auto cmp_doc = comparison_summary(cmp);
  for (const auto& [k, v] : cmp_doc.items()) summary[k] = v;
  write_text(dir / "comparison.json", summary.dump(2) + "\n");
  write_text(dir / "pareto.svg", render([&](std::ostream& os) { svg::pareto_scatter(os, cmp, "Pareto fronts"); }));

  out << "L_max " << fmt_num(cmp.l_max) << ", baseline " << cmp.methods[baseline].method << '\n';
  for (const auto& m : cmp.methods)
    out << "  " << m.method << ": hypervolume " << fmt_num(m.hypervolume) << ", improvement "
        << (m.improvement_rate ? fmt_num(*m.improvement_rate * 100.0) + "%" : std::string("n/a")) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// benchmark / robustness

struct ExperimentArgs {
  std::vector<int> sizes;
  int instances = 0;
  std::vector<std::string> methods;
  double budget = 0.0;
  bool pareto_only = false;
};

inline RunConfig apply_experiment_args(RunConfig cfg, const ExperimentArgs& a, const CLI::App& sub) {
  if (sub.count("--sizes")) cfg.sizes = a.sizes;
  if (sub.count("--instances")) cfg.instances_per_size = a.instances;
  if (sub.count("--methods")) cfg.methods = a.methods;
  if (sub.count("--budget")) {
    cfg.separation_budget = a.budget;
    cfg.monolithic.time_budget = a.budget;
  }
  if (const auto* o = sub.get_option_no_throw("--pareto-only"); o && o->count()) cfg.pareto_only = a.pareto_only;
  return cfg;
}

inline int cmd_benchmark(const RunConfig& cfg, std::ostream& out) {
  check(cfg);
  const auto report = run_benchmark(benchmark_config(cfg));
  const fs::path dir(cfg.out);
  write_text(dir / "benchmark.csv", render([&](std::ostream& os) { write_benchmark_csv(report, cfg, os); }));
  write_text(dir / "benchmark_table.csv", render([&](std::ostream& os) { write_benchmark_table(report, cfg, os); }));
  write_text(dir / "benchmark.json", benchmark_json(report, cfg).dump(2) + "\n");
  write_text(dir / "benchmark_timings.csv", render([&](std::ostream& os) { write_benchmark_timings(report, os); }));
  write_text(dir / "plots" / "benchmark_hv.svg", render([&](std::ostream& os) { plot_benchmark_hv(report, os); }));
  if (report.config.methods.size() >= 2) {
    write_text(dir / "plots" / "benchmark_improvement.svg",
               render([&](std::ostream& os) { plot_benchmark_improvement(report, os); }));
    const auto n_instances = report.cells.size() / report.config.methods.size();
    for (std::size_t k = 0; k < n_instances; ++k) {
      const auto& c = report.cells[k * report.config.methods.size()];
      const std::string name = "pareto_s" + std::to_string(c.size) + "_i" + std::to_string(c.index) + ".svg";
      write_text(dir / "plots" / name, render([&](std::ostream& os) {
                   svg::pareto_scatter(os, cell_comparison(report, k),
                                       "Pareto fronts, size " + std::to_string(c.size) + " instance " +
                                           std::to_string(c.index));
                 }));
    }
  }
  out << render([&](std::ostream& os) { write_benchmark_table(report, cfg, os); });
  bool any = false;
  for (const auto& c : report.cells) any = any || c.pool_size > 0;
  return any ? kOk : kEmpty;
}

inline int cmd_robustness(const RunConfig& cfg, std::ostream& out) {
  check(cfg);
  RobustnessConfig rc;
  rc.benchmark = benchmark_config(cfg);
  rc.pareto_only = cfg.pareto_only;
  const auto report = run_robustness(rc);
  std::vector<ProblemInstance> instances;
  for (const auto& e : report.entries) instances.push_back(generate_instance(e.size, e.instance_seed, cfg.generator));
  const fs::path dir(cfg.out);
  write_text(dir / "robustness.csv", render([&](std::ostream& os) { write_robustness_csv(report, cfg, os); }));
  write_text(dir / "robustness.json", robustness_json(report, cfg, &instances).dump(2) + "\n");
  write_text(dir / "plots" / "robustness_hv.svg", render([&](std::ostream& os) { plot_robustness(report, os); }));
  write_text(dir / "plots" / "robustness_rate.svg",
             render([&](std::ostream& os) { plot_robustness_rate(report, os); }));
  out << "size,median_hv_before,median_hv_after,median_rate_percent\n";
  for (const auto& s : report.sizes)
    out << s.size << ',' << fmt_num(s.median_before) << ',' << fmt_num(s.median_after) << ','
        << opt_num(s.median_rate, 100.0) << '\n';
  out << "fraction of trials with HV_after <= HV_before: " << fmt_num(report.fraction_not_improved()) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string instance;
  std::string pool;
};

inline int cmd_validate(const RunConfig& cfg, const ValidateArgs& a, std::ostream& out) {
  ProblemInstance inst;
  try {
    inst = load_instance(a.instance);
  } catch (const ParseError& e) {
    out << "INVALID " << e.what() << '\n';
    return kUsage;
  }
  const auto report = validate_instance(inst);
  if (!report.ok()) {
    out << "INVALID " << a.instance << '\n' << report.to_string();
    return kUsage;
  }
  out << "OK instance " << a.instance << " (" << inst.num_tasks() << " tasks)\n";
  if (!a.pool.empty()) {
    const auto pool = pool_from_json(parse_json_file(a.pool), inst);
    const auto audit = audit_pool(pool, inst, cfg.scheduler);
    if (!audit.ok()) {
      out << "INVALID pool " << a.pool << '\n' << audit.to_string();
      return kUsage;
    }
    out << "OK pool " << a.pool << " (" << pool.size() << " entries)\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"hyplan: batch allocation and scheduling via QUBO separation vs a joint baseline", "hyplan"};
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--config", g.config_path, "JSON config file (flags override its values)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--budget-mode", g.budget_mode, "work (deterministic) or wall")
      ->check(CLI::IsMember({"work", "wall"}));
  app.add_flag("--print-config", g.print_config, "print the resolved config and exit");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write benchmark instances");
  generate->add_option("--size", gen.size, "tasks per instance")->required();
  generate->add_option("--count", gen.count, "number of instances");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "run one method on one instance");
  solve_cmd->add_option("--instance", solve.instance, "instance file")->required();
  solve_cmd->add_option("--method", solve.method, "separation-sa | non-separation | separation-import");
  solve_cmd->add_option("--samples", solve.samples, "sample file for separation-import");
  solve_cmd->add_option("--export-qubo", solve.export_qubo, "write the QUBO in text form");
  solve_cmd->add_option("--export-lp", solve.export_lp, "write the schedule MILP of the first pool entry");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "compare pools under a shared L_max");
  compare_cmd->add_option("--pools", compare.pools, "pool files")->required();
  compare_cmd->add_option("--baseline", compare.baseline, "baseline method name (default: last pool)");

  ExperimentArgs bench_args, rob_args;
  auto add_experiment_flags = [](CLI::App* sub, ExperimentArgs& a) {
    sub->add_option("--sizes", a.sizes, "problem sizes");
    sub->add_option("--instances", a.instances, "instances per size")->check(CLI::PositiveNumber);
    sub->add_option("--methods", a.methods, "methods to run");
    sub->add_option("--budget", a.budget, "per-instance budget in seconds for every method");
  };
  auto* bench = app.add_subcommand("benchmark", "separation vs baseline hypervolume benchmark");
  add_experiment_flags(bench, bench_args);
  auto* robust = app.add_subcommand("robustness", "swap-perturbation robustness study");
  add_experiment_flags(robust, rob_args);
  robust->add_flag("--pareto-only", rob_args.pareto_only, "perturb only Pareto-optimal entries");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "check an instance (and optionally a pool)");
  validate_cmd->add_option("--instance", validate.instance, "instance file")->required();
  validate_cmd->add_option("--pool", validate.pool, "pool file to audit");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    auto cfg = resolve_config(g, app);
    if (bench->parsed()) cfg = apply_experiment_args(cfg, bench_args, *bench);
    if (robust->parsed()) cfg = apply_experiment_args(cfg, rob_args, *robust);
    if (g.print_config) {
      out << to_json(cfg).dump(2) << '\n';
      return kOk;
    }
    if (generate->parsed()) return cmd_generate(cfg, gen, out);
    if (solve_cmd->parsed()) return cmd_solve(cfg, solve, out, err);
    if (compare_cmd->parsed()) return cmd_compare(cfg, compare, out);
    if (bench->parsed()) return cmd_benchmark(cfg, out);
    if (robust->parsed()) return cmd_robustness(cfg, out);
    if (validate_cmd->parsed()) return cmd_validate(cfg, validate, out);
    err << app.help();
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace hyplan::cli
