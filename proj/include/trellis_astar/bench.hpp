#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trellis_astar/errors.hpp"
#include "trellis_astar/io.hpp"
#include "trellis_astar/pipeline.hpp"

namespace trellis_astar::bench {

using nlohmann::json;

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names{"greedy", "beam", "exact-astar", "approx-astar", "oracle"};
  return names;
}

struct InstanceSpec {
  std::string name;
  std::string path;
};

/// Parsed manifest. Instance paths are resolved against the manifest's directory.
struct Manifest {
  std::string cost = "ginkgo";
  std::string heuristic;
  std::vector<InstanceSpec> instances;
  std::vector<std::string> algorithms;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  pipeline::AlgorithmOptions options;
};

inline Manifest parse_manifest(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InputError("manifest must be a JSON object");
  Manifest m;
  try {
    m.cost = j.value("cost", m.cost);
    m.heuristic = j.value("heuristic", std::string{});
    m.repetitions = j.value("repetitions", std::size_t{1});
    m.seed = j.value("seed", std::uint64_t{0});
    if (!j.contains("instances") || !j["instances"].is_array() || j["instances"].empty()) {
      throw InputError("manifest needs a nonempty \"instances\" array");
    }
    for (const auto& inst : j["instances"]) {
      InstanceSpec spec;
      if (inst.is_string()) {
        spec.path = inst.get<std::string>();
      } else if (inst.is_object() && inst.contains("path")) {
        spec.path = inst["path"].get<std::string>();
        spec.name = inst.value("name", std::string{});
      } else {
        throw InputError("each instance must be a path or an object with \"path\"");
      }
      std::filesystem::path p(spec.path);
      if (p.is_relative()) p = base_dir / p;
      if (spec.name.empty()) spec.name = std::filesystem::path(spec.path).stem().string();
      spec.path = p.string();
      m.instances.push_back(std::move(spec));
    }
    if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty()) {
      throw InputError("manifest needs a nonempty \"algorithms\" array");
    }
    for (const auto& a : j["algorithms"]) {
      const auto name = a.get<std::string>();
      const auto& known = known_algorithms();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw InputError("unknown algorithm \"" + name + "\" in manifest");
      }
      m.algorithms.push_back(name);
    }
    const json opts = j.value("options", json::object());
    m.options.beam_width = opts.value("width", std::size_t{0});
    m.options.extender.pool = opts.value("pool", m.options.extender.pool);
    m.options.extender.k = opts.value("top_k", m.options.extender.k);
    m.options.rounds = opts.value("rounds", std::size_t{1});
    const auto sampler = opts.value("sampler", std::string("best-k"));
    if (sampler != "best-k" && sampler != "importance") throw InputError("unknown sampler \"" + sampler + "\"");
    m.options.extender.mode = sampler == "importance" ? SamplerMode::kImportance : SamplerMode::kBestK;
    const auto init = opts.value("init", std::string("beam"));
    if (init == "none") m.options.init = pipeline::InitKind::kNone;
    else if (init == "greedy") m.options.init = pipeline::InitKind::kGreedy;
    else if (init == "beam") m.options.init = pipeline::InitKind::kBeam;
    else throw InputError("unknown init \"" + init + "\"");
    if (opts.contains("node_budget")) m.options.extender.node_budget = opts["node_budget"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
  if (m.repetitions < 1) throw InputError("manifest repetitions must be at least 1");
  try {
    m.options.extender.validate();
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  return m;
}

struct Row {
  std::string instance;
  std::optional<std::size_t> n;
  std::string algorithm;
  std::optional<double> cost;
  std::optional<double> cost_minus_greedy;
  std::optional<std::uint64_t> nodes_explored;
  std::optional<double> log10_trees_minus_n_log10_3;
  std::optional<double> wall_ms;
  std::uint64_t seed = 0;
  std::string error;
};

/// Runs every algorithm of the manifest on one instance and repetition.
/// Failures become per-row error entries.
inline std::vector<Row> run_job(const Manifest& m, const InstanceSpec& spec, std::uint64_t seed) {
  std::vector<Row> rows;
  auto fail_all = [&](const std::string& msg) {
    rows.clear();
    for (const auto& a : m.algorithms) {
      Row r;
      r.instance = spec.name;
      r.algorithm = a;
      r.seed = seed;
      r.error = msg;
      rows.push_back(std::move(r));
    }
    return rows;
  };
  std::optional<pipeline::Instance> inst;
  std::string heuristic;
  try {
    const auto cost = pipeline::parse_cost(m.cost);
    inst = pipeline::load_instance(cost, spec.path, "");
    heuristic = pipeline::resolve_heuristic(cost, m.heuristic);
  } catch (const std::exception& e) {
    return fail_all(e.what());
  }
  const std::size_t n = inst->size();
  pipeline::AlgorithmOptions opt = m.options;
  opt.heuristic = heuristic;
  opt.seed = seed;

  return pipeline::with_model(*inst, heuristic, [&](auto& model) {
    std::optional<double> greedy_cost;
    try {
      greedy_cost = pipeline::run_algorithm("greedy", model, opt).cost;
    } catch (const std::exception&) {
    }
    const double n_log10_3 = static_cast<double>(n) * std::log10(3.0);
    for (const auto& a : m.algorithms) {
      Row r;
      r.instance = spec.name;
      r.n = n;
      r.algorithm = a;
      r.seed = seed;
      try {
        const std::string algo = a == "exact-astar" ? "exact" : a == "approx-astar" ? "approx" : a;
        const auto o = pipeline::run_algorithm(algo, model, opt);
        r.cost = o.cost;
        if (greedy_cost) r.cost_minus_greedy = a == "greedy" ? 0.0 : o.cost - *greedy_cost;
        if (o.stats) r.nodes_explored = o.stats->nodes_explored;
        r.log10_trees_minus_n_log10_3 = o.log10_trees - n_log10_3;
        r.wall_ms = o.wall_ms;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      rows.push_back(std::move(r));
    }
    return rows;
  });
}

/// Runs all (instance, repetition) jobs on up to `workers` threads. Rows come
/// back in manifest order regardless of scheduling.
inline std::vector<Row> run(const Manifest& m, std::size_t workers) {
  struct Job {
    const InstanceSpec* spec;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& spec : m.instances) {
    for (std::size_t rep = 0; rep < m.repetitions; ++rep) jobs.push_back({&spec, m.seed + rep});
  }
  std::vector<std::vector<Row>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) results[i] = run_job(m, *jobs[i].spec, jobs[i].seed);
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::vector<Row> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

struct Aggregate {
  std::size_t n = 0;
  std::string algorithm;
  std::size_t runs = 0;
  double mean_cost = 0.0;
  double se_cost = 0.0;
  double mean_cost_minus_greedy = 0.0;
  double se_cost_minus_greedy = 0.0;
  double mean_wall_ms = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
  if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(xs.size()))};
}

}  // namespace detail

/// Mean and standard error per (n, algorithm) over rows without errors.
inline std::vector<Aggregate> aggregate(const std::vector<Row>& rows) {
  std::map<std::pair<std::size_t, std::string>, std::vector<const Row*>> groups;
  for (const auto& r : rows) {
    if (r.error.empty() && r.n && r.cost && std::isfinite(*r.cost)) groups[{*r.n, r.algorithm}].push_back(&r);
  }
  std::vector<Aggregate> out;
  for (const auto& [key, members] : groups) {
    Aggregate a;
    a.n = key.first;
    a.algorithm = key.second;
    a.runs = members.size();
    std::vector<double> cost;
    std::vector<double> diff;
    std::vector<double> wall;
    for (const Row* r : members) {
      cost.push_back(*r->cost);
      if (r->cost_minus_greedy) diff.push_back(*r->cost_minus_greedy);
      if (r->wall_ms) wall.push_back(*r->wall_ms);
    }
    std::tie(a.mean_cost, a.se_cost) = detail::mean_and_se(cost);
    std::tie(a.mean_cost_minus_greedy, a.se_cost_minus_greedy) = detail::mean_and_se(diff);
    a.mean_wall_ms = detail::mean_and_se(wall).first;
    out.push_back(std::move(a));
  }
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <class T>
std::string opt_field(const std::optional<T>& v) {
  if (!v) return "";
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << *v;
  return ss.str();
}

inline std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "instance,n,algorithm,cost,cost_minus_greedy,nodes_explored,log10_trees_explored_minus_n_log10_3,wall_ms,seed,"
    "error";
inline constexpr const char* kAggregateHeader =
    "n,algorithm,runs,mean_cost,se_cost,mean_cost_minus_greedy,se_cost_minus_greedy,mean_wall_ms";

/// Data rows, a blank line, then the aggregate block.
inline std::string format_report(const std::vector<Row>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << detail::csv_field(r.instance) << ',' << detail::opt_field(r.n) << ',' << r.algorithm << ','
        << detail::opt_field(r.cost) << ',' << detail::opt_field(r.cost_minus_greedy) << ','
        << detail::opt_field(r.nodes_explored) << ',' << detail::opt_field(r.log10_trees_minus_n_log10_3) << ','
        << detail::opt_field(r.wall_ms) << ',' << r.seed << ',' << detail::csv_field(r.error) << '\n';
  }
  out << '\n' << kAggregateHeader << '\n';
  for (const auto& a : aggregate(rows)) {
    out << a.n << ',' << a.algorithm << ',' << a.runs << ',' << detail::num(a.mean_cost) << ','
        << detail::num(a.se_cost) << ',' << detail::num(a.mean_cost_minus_greedy) << ','
        << detail::num(a.se_cost_minus_greedy) << ',' << detail::num(a.mean_wall_ms) << '\n';
  }
  return out.str();
}

}  // namespace trellis_astar::bench
