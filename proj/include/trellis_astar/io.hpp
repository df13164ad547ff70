#pragma once

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"
#include "trellis_astar/ginkgo.hpp"
#include "trellis_astar/graph_costs.hpp"
#include "trellis_astar/search.hpp"
#include "trellis_astar/trellis.hpp"

namespace trellis_astar::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

// ---------------------------------------------------------------- graphs

/// Graph text format: "n m" then m lines "i j w" with 0-based i < j.
inline SimilarityGraph parse_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw InputError("graph file is empty");
  long long n = 0;
  long long m = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> n >> m) || n < 1 || m < 0) throw InputError("graph header must be \"n m\" with n >= 1 (line 1)");
  }
  SimilarityGraph g(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n * n), false);
  for (long long k = 0; k < m; ++k) {
    if (!next_line()) throw InputError("graph file ends after " + std::to_string(k) + " of " + std::to_string(m) + " edges");
    std::istringstream es(line);
    long long i = 0;
    long long j = 0;
    double w = 0.0;
    std::string extra;
    if (!(es >> i >> j >> w) || (es >> extra)) throw InputError("malformed edge on line " + std::to_string(lineno));
    if (i < 0 || j < 0 || i >= n || j >= n) throw InputError("edge index out of range on line " + std::to_string(lineno));
    if (i >= j) throw InputError("edge must have i < j on line " + std::to_string(lineno));
    if (!std::isfinite(w)) throw InputError("non-finite weight on line " + std::to_string(lineno));
    const auto key = static_cast<std::size_t>(i * n + j);
    if (seen[key]) throw InputError("duplicate edge on line " + std::to_string(lineno));
    seen[key] = true;
    g.set_weight(static_cast<ElementId>(i), static_cast<ElementId>(j), w);
  }
  if (next_line()) throw InputError("trailing content after the declared edges (line " + std::to_string(lineno) + ")");
  return g;
}

inline SimilarityGraph read_graph(const std::string& path) {
  std::istringstream in(read_file(path));
  return parse_graph(in);
}

inline std::string format_graph(const SimilarityGraph& g) {
  const auto edges = g.edges();
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << g.size() << ' ' << edges.size() << '\n';
  for (const auto& e : edges) out << e.i << ' ' << e.j << ' ' << e.w << '\n';
  return out.str();
}

/// Points CSV: one row per element, no header.
inline std::vector<std::vector<double>> parse_points_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputError("bad number \"" + cell + "\" on line " + std::to_string(lineno));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("row " + std::to_string(lineno) + " has " + std::to_string(row.size()) + " columns, expected " +
                       std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("points file has no rows");
  return rows;
}

/// Cosine similarity graph of the points, mean-centered.
inline SimilarityGraph read_points_graph(const std::string& path) {
  std::istringstream in(read_file(path));
  auto g = cosine_similarity_graph(parse_points_csv(in));
  return g.size() >= 2 ? mean_center(g) : g;
}

// ------------------------------------------------------------ hierarchies

template <ElementSet S>
json hierarchy_to_json(const Hierarchy<S>& h) {
  const auto& nodes = h.nodes();
  auto rec = [&](auto&& self, int idx) -> json {
    const auto& nd = nodes[static_cast<std::size_t>(idx)];
    json j;
    j["members"] = nd.cluster.members();
    j["children"] = json::array();
    if (nd.left >= 0) {
      j["children"].push_back(self(self, nd.left));
      j["children"].push_back(self(self, nd.right));
    }
    return j;
  };
  return rec(rec, 0);
}

/// Reads a nested {"members", "children"} tree; the union of members at the
/// root must be 0..n-1.
template <ElementSet S>
Hierarchy<S> hierarchy_from_json(const json& j) {
  std::map<S, std::pair<S, S>> splits;
  auto rec = [&](auto&& self, const json& nd) -> S {
    if (!nd.is_object() || !nd.contains("members") || !nd["members"].is_array()) {
      throw InputError("tree node needs a \"members\" array");
    }
    S c;
    for (const auto& m : nd["members"]) {
      if (!m.is_number_integer() || m.get<long long>() < 0) throw InputError("tree members must be nonnegative integers");
      c.insert(static_cast<ElementId>(m.get<long long>()));
    }
    const json children = nd.value("children", json::array());
    if (!children.is_array()) throw InputError("tree \"children\" must be an array");
    if (children.empty()) {
      if (c.count() != 1) throw InputError("tree leaf must be a singleton");
      return c;
    }
    if (children.size() != 2) throw InputError("tree nodes must have zero or two children");
    const S l = self(self, children[0]);
    const S r = self(self, children[1]);
    try {
      Hierarchy<S>::check_partition(c, l, r);
    } catch (const DomainError& e) {
      throw InputError(e.what());
    }
    splits.emplace(c, std::make_pair(l, r));
    return c;
  };
  const S root = rec(rec, j);
  try {
    return Hierarchy<S>::from_splits(root, splits);
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
}

// ------------------------------------------------------------------ jets

inline json jet_to_json(const JetEvent& e) {
  json j;
  j["lambda"] = e.lambda;
  j["t_cut"] = e.t_cut;
  j["leaves"] = json::array();
  for (const auto& v : e.leaves) j["leaves"].push_back({v.e, v.px, v.py, v.pz});
  if (e.truth) j["truth_tree"] = hierarchy_to_json(*e.truth);
  return j;
}

inline JetEvent jet_from_json(const json& j) {
  if (!j.is_object()) throw InputError("jet document must be a JSON object");
  for (const char* key : {"lambda", "t_cut", "leaves"}) {
    if (!j.contains(key)) throw InputError(std::string("jet document lacks \"") + key + "\"");
  }
  if (!j["lambda"].is_number() || !j["t_cut"].is_number()) throw InputError("lambda and t_cut must be numbers");
  JetEvent e;
  e.lambda = j["lambda"].get<double>();
  e.t_cut = j["t_cut"].get<double>();
  if (!j["leaves"].is_array()) throw InputError("\"leaves\" must be an array");
  for (const auto& v : j["leaves"]) {
    if (!v.is_array() || v.size() != 4) throw InputError("each leaf must be [E, px, py, pz]");
    for (const auto& x : v) {
      if (!x.is_number()) throw InputError("leaf components must be numbers");
    }
    e.leaves.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()});
  }
  try {
    e.validate();
  } catch (const DomainError& err) {
    throw InputError(err.what());
  }
  if (j.contains("truth_tree")) {
    e.truth = hierarchy_from_json<LargeCluster>(j["truth_tree"]);
    if (e.truth->element_count() != e.leaves.size()) throw InputError("truth_tree does not cover the leaves");
  }
  return e;
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in " + what + ": " + e.what());
  }
}

inline JetEvent read_jet(const std::string& path) { return jet_from_json(parse_json(read_file(path), path)); }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --------------------------------------------------------------- results

inline json stats_to_json(const SearchStats& s) {
  json j;
  j["nodes_explored"] = s.nodes_explored;
  j["heap_pushes"] = s.heap_pushes;
  j["heap_pops"] = s.heap_pops;
  j["iterations"] = s.iterations;
  j["refresh_passes"] = s.refresh_passes;
  j["entries_created"] = s.entries_created;
  j["wall_ms"] = s.wall_ms;
  // JSON has no infinities
  if (std::isfinite(s.trees_in_trellis_log10)) j["trees_in_trellis_log10"] = s.trees_in_trellis_log10;
  else j["trees_in_trellis_log10"] = nullptr;
  return j;
}

inline json cost_to_json(double cost) {
  if (std::isfinite(cost)) return cost;
  return nullptr;
}

/// Result document: cost, tree, stats, echoed config, format version.
template <ElementSet S>
json result_to_json(double cost, const Hierarchy<S>& tree, const SearchStats& stats, const json& config) {
  json j;
  j["format_version"] = kFormatVersion;
  j["cost"] = cost_to_json(cost);
  j["tree"] = hierarchy_to_json(tree);
  j["stats"] = stats_to_json(stats);
  j["config"] = config;
  return j;
}

// --------------------------------------------------------------- trellis

/// Debug snapshot: cluster hex -> {explored, best_split, best_value, queue_size}.
template <ElementSet S>
json trellis_snapshot(const Trellis<S>& t) {
  std::map<S, json> ordered;
  t.for_each_node([&](const TrellisNode<S>& nd) {
    json j;
    j["explored"] = nd.explored();
    if (auto split = nd.best_split()) j["best_split"] = {split->first.to_hex(), split->second.to_hex()};
    else j["best_split"] = nullptr;
    if (auto v = nd.best_value()) j["best_value"] = cost_to_json(*v);
    else j["best_value"] = nullptr;
    j["queue_size"] = nd.queue ? nd.queue->size() : 0;
    ordered.emplace(nd.cluster, std::move(j));
  });
  json out = json::object();
  for (auto& [c, j] : ordered) out[c.to_hex()] = std::move(j);
  return out;
}

}  // namespace trellis_astar::io
