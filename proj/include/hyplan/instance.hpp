#pragma once

// Production-planning problem data: task clusters, physical resources and the
// per-(cluster, resource) cap on virtual copies. Also the random benchmark
// generator (single furnace, single cluster) and JSON persistence.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplan/rng.hpp"

namespace hyplan {

inline constexpr int kInstanceSchemaVersion = 1;

struct Task {
  int cluster_id = 0;
  int task_id = 0;
  int weight = 1;
  int due_date = 1;

  friend bool operator==(const Task&, const Task&) = default;
};

struct Resource {
  int resource_id = 0;
  int capacity = 1;
  int setup_time = 0;
  int processing_time = 1;

  friend bool operator==(const Resource&, const Resource&) = default;
};

struct Cluster {
  int cluster_id = 0;
  std::vector<Task> tasks;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ProblemInstance {
  std::vector<Cluster> clusters;
  std::vector<Resource> resources;
  // virtual_copies[c][j]: how many times resource j may be used by cluster c.
  std::vector<std::vector<int>> virtual_copies;
  std::uint64_t seed = 0;
  std::string label;

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;

  [[nodiscard]] std::size_t num_tasks() const {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.tasks.size();
    return n;
  }

  [[nodiscard]] int total_weight(std::size_t cluster) const {
    int w = 0;
    for (const auto& t : clusters.at(cluster).tasks) w += t.weight;
    return w;
  }

  [[nodiscard]] int max_due_date() const {
    int m = 0;
    for (const auto& c : clusters)
      for (const auto& t : c.tasks) m = std::max(m, t.due_date);
    return m;
  }
};

struct Finding {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  [[nodiscard]] bool ok() const { return findings.empty(); }

  void add(std::string field, std::string message) {
    findings.push_back({std::move(field), std::move(message)});
  }

  [[nodiscard]] std::string to_string() const {
    std::ostringstream os;
    for (const auto& f : findings) os << f.field << ": " << f.message << '\n';
    return os.str();
  }
};

class InvalidInstance : public std::invalid_argument {
 public:
  explicit InvalidInstance(ValidationReport report)
      : std::invalid_argument("invalid instance:\n" + report.to_string()),
        report_(std::move(report)) {}
  [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ValidationReport validate_instance(const ProblemInstance& inst) {
  ValidationReport r;
  if (inst.clusters.empty()) r.add("clusters", "at least one cluster is required");
  if (inst.resources.empty()) r.add("resources", "at least one resource is required");

  int max_capacity = 0;
  for (std::size_t j = 0; j < inst.resources.size(); ++j) {
    const auto& res = inst.resources[j];
    const std::string f = "resources[" + std::to_string(j) + "]";
    if (res.capacity < 1) r.add(f + ".capacity", "must be >= 1");
    if (res.setup_time < 0) r.add(f + ".setup_time", "must be >= 0");
    if (res.processing_time < 1) r.add(f + ".processing_time", "must be >= 1");
    for (std::size_t k = 0; k < j; ++k)
      if (inst.resources[k].resource_id == res.resource_id)
        r.add(f + ".resource_id", "duplicate resource id " + std::to_string(res.resource_id));
    max_capacity = std::max(max_capacity, res.capacity);
  }

  for (std::size_t c = 0; c < inst.clusters.size(); ++c) {
    const auto& cl = inst.clusters[c];
    const std::string f = "clusters[" + std::to_string(c) + "]";
    if (cl.tasks.empty()) r.add(f + ".tasks", "cluster has no tasks");
    for (std::size_t k = 0; k < c; ++k)
      if (inst.clusters[k].cluster_id == cl.cluster_id)
        r.add(f + ".cluster_id", "duplicate cluster id " + std::to_string(cl.cluster_id));
    for (std::size_t i = 0; i < cl.tasks.size(); ++i) {
      const auto& t = cl.tasks[i];
      const std::string ft = f + ".tasks[" + std::to_string(i) + "]";
      if (t.cluster_id != cl.cluster_id)
        r.add(ft + ".cluster_id", "task cluster id does not match its cluster");
      if (t.weight < 1) r.add(ft + ".weight", "must be >= 1");
      if (t.due_date < 1) r.add(ft + ".due_date", "must be >= 1");
      if (!inst.resources.empty() && t.weight > max_capacity)
        r.add(ft + ".weight", "task (" + std::to_string(t.cluster_id) + ", " +
                                  std::to_string(t.task_id) + ") weight " +
                                  std::to_string(t.weight) + " exceeds every resource capacity (max " +
                                  std::to_string(max_capacity) + ")");
      for (std::size_t k = 0; k < i; ++k)
        if (cl.tasks[k].task_id == t.task_id)
          r.add(ft + ".task_id", "duplicate task id " + std::to_string(t.task_id));
    }
  }

  if (inst.virtual_copies.size() != inst.clusters.size()) {
    r.add("virtual_copies", "expected one row per cluster");
    return r;
  }
  for (std::size_t c = 0; c < inst.clusters.size(); ++c) {
    const auto& row = inst.virtual_copies[c];
    const std::string f = "virtual_copies[" + std::to_string(c) + "]";
    if (row.size() != inst.resources.size()) {
      r.add(f, "expected one entry per resource");
      continue;
    }
    const auto n_c = static_cast<int>(inst.clusters[c].tasks.size());
    long long slots = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] < 1 || row[j] > n_c)
        r.add(f + "[" + std::to_string(j) + "]",
              "must be within [1, " + std::to_string(n_c) + "], got " + std::to_string(row[j]));
      slots += static_cast<long long>(row[j]) * inst.resources[j].capacity;
    }
    const int load = inst.total_weight(c);
    if (load > slots)
      r.add(f, "provably infeasible allocation: total weight " + std::to_string(load) +
                   " exceeds virtual capacity " + std::to_string(slots));
  }
  return r;
}

inline void require_valid(const ProblemInstance& inst) {
  auto report = validate_instance(inst);
  if (!report.ok()) throw InvalidInstance(std::move(report));
}

struct GeneratorParams {
  int weight_min = 1;
  int weight_max = 10;
  int due_min = 3;
  int due_max = 30;
  int capacity = 20;
  int setup_time = 0;
  int processing_time = 1;
  // Use V = N (every task may get its own melt) instead of the tighter default.
  bool full_virtual_copies = false;
};

// min(N, ceil(total / capacity) + 2)
inline int default_virtual_copies(int num_tasks, int total_weight, int capacity) {
  const int needed = (total_weight + capacity - 1) / capacity;
  return std::min(num_tasks, needed + 2);
}

inline ProblemInstance generate_instance(int num_tasks, std::uint64_t seed,
                                         const GeneratorParams& params = {}) {
  if (num_tasks < 1) throw std::invalid_argument("num_tasks must be >= 1");
  if (params.weight_min > params.weight_max || params.weight_min < 1)
    throw std::invalid_argument("invalid weight range");
  if (params.due_min > params.due_max || params.due_min < 1)
    throw std::invalid_argument("invalid due-date range");
  if (params.capacity < 1 || params.setup_time < 0 || params.processing_time < 1)
    throw std::invalid_argument("invalid resource parameters");

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> weight(params.weight_min, params.weight_max);
  std::uniform_int_distribution<int> due(params.due_min, params.due_max);

  ProblemInstance inst;
  inst.seed = seed;
  inst.label = "bench_n" + std::to_string(num_tasks) + "_s" + std::to_string(seed);
  Cluster cluster;
  cluster.cluster_id = 0;
  int total = 0;
  for (int i = 0; i < num_tasks; ++i) {
    Task t;
    t.cluster_id = 0;
    t.task_id = i;
    t.weight = weight(rng);
    t.due_date = due(rng);
    total += t.weight;
    cluster.tasks.push_back(t);
  }
  inst.clusters.push_back(std::move(cluster));
  inst.resources.push_back({0, params.capacity, params.setup_time, params.processing_time});
  const int v = params.full_virtual_copies
                    ? num_tasks
                    : default_virtual_copies(num_tasks, total, params.capacity);
  inst.virtual_copies = {{v}};
  return inst;
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::ordered_json to_json(const ProblemInstance& inst) {
  nlohmann::ordered_json j;
  j["schema_version"] = kInstanceSchemaVersion;
  j["label"] = inst.label;
  j["seed"] = inst.seed;
  auto clusters = nlohmann::ordered_json::array();
  for (const auto& c : inst.clusters) {
    nlohmann::ordered_json jc;
    jc["cluster_id"] = c.cluster_id;
    auto tasks = nlohmann::ordered_json::array();
    for (const auto& t : c.tasks) {
      nlohmann::ordered_json jt;
      jt["task_id"] = t.task_id;
      jt["weight"] = t.weight;
      jt["due_date"] = t.due_date;
      tasks.push_back(std::move(jt));
    }
    jc["tasks"] = std::move(tasks);
    clusters.push_back(std::move(jc));
  }
  j["clusters"] = std::move(clusters);
  auto resources = nlohmann::ordered_json::array();
  for (const auto& r : inst.resources) {
    nlohmann::ordered_json jr;
    jr["resource_id"] = r.resource_id;
    jr["capacity"] = r.capacity;
    jr["setup_time"] = r.setup_time;
    jr["processing_time"] = r.processing_time;
    resources.push_back(std::move(jr));
  }
  j["resources"] = std::move(resources);
  j["virtual_copies"] = inst.virtual_copies;
  return j;
}

namespace detail {

template <class Json>
const Json& require_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("schema error: missing field '" + where + "." + key + "'");
  return *it;
}

template <class Json>
long long require_int(const Json& obj, const char* key, const std::string& where,
                      long long min_value) {
  const auto& v = require_field(obj, key, where);
  const std::string name = where + "." + key;
  if (!v.is_number_integer()) throw ParseError("field '" + name + "': expected an integer");
  const auto value = v.template get<long long>();
  if (value < min_value)
    throw ParseError("field '" + name + "': value " + std::to_string(value) + " must be >= " +
                     std::to_string(min_value));
  if (value > std::numeric_limits<int>::max())
    throw ParseError("field '" + name + "': value out of range");
  return value;
}

template <class Json>
const Json& require_array(const Json& obj, const char* key, const std::string& where) {
  const auto& v = require_field(obj, key, where);
  if (!v.is_array())
    throw ParseError("schema error: field '" + where + "." + key + "' must be an array");
  return v;
}

inline std::string line_of(const std::string& text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(end), '\n');
  return std::to_string(line);
}

}  // namespace detail

template <class Json>
ProblemInstance instance_from_json(const Json& j) {
  using detail::require_array;
  using detail::require_field;
  using detail::require_int;
  if (!j.is_object()) throw ParseError("schema error: top level must be an object");
  const auto version = require_int(j, "schema_version", "$", 0);
  if (version != kInstanceSchemaVersion)
    throw ParseError("unsupported schema_version " + std::to_string(version) + " (expected " +
                     std::to_string(kInstanceSchemaVersion) + ")");

  ProblemInstance inst;
  const auto& label = require_field(j, "label", "$");
  if (!label.is_string()) throw ParseError("field '$.label': expected a string");
  inst.label = label.template get<std::string>();
  const auto& seed = require_field(j, "seed", "$");
  if (!seed.is_number_integer()) throw ParseError("field '$.seed': expected an integer");
  inst.seed = seed.template get<std::uint64_t>();

  const auto& clusters = require_array(j, "clusters", "$");
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const std::string wc = "$.clusters[" + std::to_string(c) + "]";
    Cluster cl;
    cl.cluster_id = static_cast<int>(require_int(clusters[c], "cluster_id", wc, 0));
    const auto& tasks = require_array(clusters[c], "tasks", wc);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const std::string wt = wc + ".tasks[" + std::to_string(i) + "]";
      Task t;
      t.cluster_id = cl.cluster_id;
      t.task_id = static_cast<int>(require_int(tasks[i], "task_id", wt, 0));
      t.weight = static_cast<int>(require_int(tasks[i], "weight", wt, 1));
      t.due_date = static_cast<int>(require_int(tasks[i], "due_date", wt, 1));
      cl.tasks.push_back(t);
    }
    inst.clusters.push_back(std::move(cl));
  }

  const auto& resources = require_array(j, "resources", "$");
  for (std::size_t r = 0; r < resources.size(); ++r) {
    const std::string wr = "$.resources[" + std::to_string(r) + "]";
    Resource res;
    res.resource_id = static_cast<int>(require_int(resources[r], "resource_id", wr, 0));
    res.capacity = static_cast<int>(require_int(resources[r], "capacity", wr, 1));
    res.setup_time = static_cast<int>(require_int(resources[r], "setup_time", wr, 0));
    res.processing_time = static_cast<int>(require_int(resources[r], "processing_time", wr, 1));
    inst.resources.push_back(res);
  }

  const auto& copies = require_array(j, "virtual_copies", "$");
  for (std::size_t c = 0; c < copies.size(); ++c) {
    const std::string wv = "$.virtual_copies[" + std::to_string(c) + "]";
    if (!copies[c].is_array()) throw ParseError("schema error: '" + wv + "' must be an array");
    std::vector<int> row;
    for (std::size_t r = 0; r < copies[c].size(); ++r) {
      const auto& v = copies[c][r];
      if (!v.is_number_integer() || v.template get<long long>() < 1)
        throw ParseError("field '" + wv + "[" + std::to_string(r) + "]': expected an integer >= 1");
      row.push_back(v.template get<int>());
    }
    inst.virtual_copies.push_back(std::move(row));
  }
  return inst;
}

inline std::string instance_to_string(const ProblemInstance& inst) {
  return to_json(inst).dump(2) + "\n";
}

inline ProblemInstance instance_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed instance file at line " + detail::line_of(text, e.byte) + ": " +
                     e.what());
  }
  return instance_from_json(j);
}

inline void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << instance_to_string(inst);
  if (!out) throw IoError("failed writing " + path.string());
}

inline ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return instance_from_string(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace hyplan
