#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trellis_astar/baselines.hpp"
#include "trellis_astar/bits.hpp"
#include "trellis_astar/construct.hpp"
#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"
#include "trellis_astar/ginkgo.hpp"
#include "trellis_astar/graph_costs.hpp"
#include "trellis_astar/io.hpp"
#include "trellis_astar/search.hpp"
#include "trellis_astar/trellis.hpp"

namespace trellis_astar::pipeline {

using nlohmann::json;

/// Named sub-stream of the run seed, so generator and sampler draws never
/// share a stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : stream) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return detail::mix64(seed ^ detail::mix64(h));
}

enum class CostKind { kHcc, kDasgupta, kGinkgo };

inline CostKind parse_cost(const std::string& s) {
  if (s == "hcc") return CostKind::kHcc;
  if (s == "dasgupta") return CostKind::kDasgupta;
  if (s == "ginkgo") return CostKind::kGinkgo;
  throw DomainError("unknown cost \"" + s + "\"");
}

/// Loaded dataset: a similarity graph or a jet.
struct Instance {
  CostKind cost = CostKind::kHcc;
  std::optional<SimilarityGraph> graph;
  std::optional<JetEvent> jet;

  [[nodiscard]] std::size_t size() const { return graph ? graph->size() : jet->size(); }
};

/// Graph costs read --in as a graph file or --points as a CSV; Ginkgo reads --in as a jet.
inline Instance load_instance(CostKind cost, const std::string& in, const std::string& points) {
  Instance inst;
  inst.cost = cost;
  if (cost == CostKind::kGinkgo) {
    if (in.empty()) throw InputError("the ginkgo cost needs a jet file via --in");
    if (!points.empty()) throw InputError("--points applies only to graph costs");
    inst.jet = io::read_jet(in);
    return inst;
  }
  if (in.empty() == points.empty()) throw InputError("graph costs need exactly one of --in (graph file) or --points (CSV)");
  inst.graph = in.empty() ? io::read_points_graph(points) : io::read_graph(in);
  return inst;
}

/// Resolves the heuristic name for a cost; empty selects the cost's own admissible heuristic.
inline std::string resolve_heuristic(CostKind cost, const std::string& name) {
  const std::string def = cost == CostKind::kHcc ? "hcc" : cost == CostKind::kDasgupta ? "dasgupta" : "h0";
  if (name.empty()) return def;
  if (name == "zero" || name == def) return name;
  if (cost == CostKind::kGinkgo && name == "h1") return name;
  throw ObjectiveMismatchError("heuristic \"" + name + "\" does not apply to this cost");
}

/// Calls f(model) with the model for the instance, using a fixed-width
/// cluster type when n fits into 128 elements.
template <class F>
decltype(auto) with_model(const Instance& inst, const std::string& heuristic, F&& f) {
  auto dispatch = [&]<ElementSet S>() -> decltype(auto) {
    switch (inst.cost) {
      case CostKind::kHcc: {
        HccModel<S> m(*inst.graph, heuristic == "zero" ? GraphHeuristic::kZero : GraphHeuristic::kObjective);
        return f(m);
      }
      case CostKind::kDasgupta: {
        DasguptaModel<S> m(*inst.graph, heuristic == "zero" ? GraphHeuristic::kZero : GraphHeuristic::kObjective);
        return f(m);
      }
      default: {
        const auto kind = heuristic == "zero" ? GinkgoHeuristic::kZero
                          : heuristic == "h1" ? GinkgoHeuristic::kH1
                                              : GinkgoHeuristic::kH0;
        GinkgoModel<S> m(*inst.jet, kind);
        return f(m);
      }
    }
  };
  if (inst.size() <= SmallCluster::kCapacity) return dispatch.template operator()<SmallCluster>();
  return dispatch.template operator()<LargeCluster>();
}

/// Trellis node cap from TRELLIS_ASTAR_MAX_NODES; unset means unlimited.
inline TrellisLimits limits_from_env() {
  TrellisLimits limits;
  const char* raw = std::getenv("TRELLIS_ASTAR_MAX_NODES");
  if (raw == nullptr || *raw == '\0') return limits;
  const std::string text(raw);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v == 0 || text.front() == '-') {
    throw InputError("TRELLIS_ASTAR_MAX_NODES must be a positive integer, got \"" + text + "\"");
  }
  limits.max_nodes = static_cast<std::size_t>(v);
  return limits;
}

enum class InitKind { kNone, kGreedy, kBeam };

struct AlgorithmOptions {
  std::string heuristic;  // resolved name
  std::uint64_t seed = 0;
  std::size_t beam_width = 0;  // 0: default rule
  InitKind init = InitKind::kBeam;
  ExtenderConfig extender;
  std::size_t rounds = 1;
  TrellisLimits limits;
  bool want_trellis = false;
};

/// One algorithm's outcome in a form every consumer (CLI, bench) can use.
struct Outcome {
  std::string algorithm;
  std::size_t n = 0;
  double cost = 0.0;
  json tree;
  std::optional<SearchStats> stats;
  double wall_ms = 0.0;
  /// log10 of the hierarchies the algorithm examined.
  double log10_trees = 0.0;
  std::optional<std::uint64_t> tree_count;
  std::vector<double> round_costs;
  json trellis;
};

namespace detail {

template <CostModel M>
Outcome finish(const std::string& algorithm, M& model, const SearchResult<typename M::Cluster>& r) {
  Outcome o;
  o.algorithm = algorithm;
  o.n = model.element_count();
  o.cost = r.cost;
  o.tree = io::hierarchy_to_json(r.tree);
  o.wall_ms = r.stats.wall_ms;
  return o;
}

}  // namespace detail

inline double log10_double_factorial_trees(std::size_t n) {
  double out = 0.0;
  for (std::size_t k = 3; n >= 2 && k <= 2 * n - 3; k += 2) out += std::log10(static_cast<double>(k));
  return out;
}

/// Runs one of: exact, approx, greedy, beam, oracle.
template <CostModel M>
Outcome run_algorithm(const std::string& algorithm, M& model, const AlgorithmOptions& opt) {
  using S = typename M::Cluster;
  const std::size_t n = model.element_count();
  if (algorithm == "greedy") {
    auto o = detail::finish(algorithm, model, greedy(model));
    o.log10_trees = 0.0;
    return o;
  }
  if (algorithm == "beam") {
    BeamOptions bo;
    bo.width = opt.beam_width;
    auto br = beam_search(model, bo);
    auto o = detail::finish(algorithm, model, br.best);
    o.log10_trees = std::log10(static_cast<double>(br.trees.size()));
    return o;
  }
  if (algorithm == "oracle") {
    const auto start = std::chrono::steady_clock::now();
    auto orc = brute_force_map(model);
    Outcome o;
    o.algorithm = algorithm;
    o.n = n;
    o.cost = orc.cost;
    o.tree = io::hierarchy_to_json(orc.tree);
    o.tree_count = orc.tree_count;
    o.log10_trees = std::log10(static_cast<double>(orc.tree_count));
    o.wall_ms = trellis_astar::detail::elapsed_ms(start);
    return o;
  }
  if (algorithm == "exact") {
    auto t = Trellis<S>::full(n, opt.limits);
    auto r = astar_search(t, model);
    auto o = detail::finish(algorithm, model, r);
    o.stats = r.stats;
    o.log10_trees = r.stats.trees_in_trellis_log10;
    if (opt.want_trellis) o.trellis = io::trellis_snapshot(t);
    return o;
  }
  if (algorithm == "approx") {
    std::vector<Hierarchy<S>> init;
    double init_ms = 0.0;
    if (opt.init == InitKind::kGreedy) {
      auto g = greedy(model);
      init_ms = g.stats.wall_ms;
      init.push_back(std::move(g.tree));
    } else if (opt.init == InitKind::kBeam) {
      BeamOptions bo;
      bo.width = opt.beam_width;
      auto br = beam_search(model, bo);
      init_ms = br.best.stats.wall_ms;
      init = std::move(br.trees);
    }
    auto t = init.empty() ? Trellis<S>::sparse(n, opt.limits) : init_from_trees(init, n, opt.limits);
    ExtenderConfig cfg = opt.extender;
    cfg.seed = derive_seed(opt.seed, "sampler");
    auto rounds = iterative_search(t, model, opt.rounds, cfg);
    auto o = detail::finish(algorithm, model, rounds.back());
    SearchStats total = rounds.back().stats;
    total.wall_ms = init_ms;
    for (const auto& r : rounds) {
      o.round_costs.push_back(r.cost);
      total.wall_ms += r.stats.wall_ms;
    }
    o.stats = total;
    o.wall_ms = total.wall_ms;
    o.log10_trees = total.trees_in_trellis_log10;
    if (opt.want_trellis) o.trellis = io::trellis_snapshot(t);
    return o;
  }
  throw DomainError("unknown algorithm \"" + algorithm + "\"");
}

/// Result document for an outcome; the cost is recomputed from the tree as a
/// self-check before it is written.
template <CostModel M>
json outcome_to_json(const Outcome& o, M& model, const json& config) {
  using S = typename M::Cluster;
  const auto tree = io::hierarchy_from_json<S>(o.tree);
  const double recomputed = tree_cost(tree, model);
  if (!(std::isinf(recomputed) && std::isinf(o.cost)) && !costs_close(recomputed, o.cost)) {
    throw SearchExhaustedError("internal check failed: reported cost does not match the tree");
  }
  json j = io::result_to_json(o.cost, tree, o.stats.value_or(SearchStats{}), config);
  if (!o.stats) j["stats"] = json{{"wall_ms", o.wall_ms}};
  j["algorithm"] = o.algorithm;
  j["n"] = o.n;
  if (o.tree_count) j["tree_count"] = *o.tree_count;
  if (!o.round_costs.empty()) {
    j["round_costs"] = json::array();
    for (double c : o.round_costs) j["round_costs"].push_back(io::cost_to_json(c));
  }
  return j;
}

}  // namespace trellis_astar::pipeline
