#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "trellis_astar/bits.hpp"
#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"

namespace trellis_astar {

/// Undirected weighted graph over n elements, stored dense. Unlisted pairs
/// weigh 0; there are no self-edges.
class SimilarityGraph {
 public:
  struct Edge {
    ElementId i;
    ElementId j;
    double w;
  };

  explicit SimilarityGraph(std::size_t n) : n_(n), w_(n * n, 0.0) {
    if (n == 0) throw DomainError("similarity graph needs at least one element");
  }

  SimilarityGraph(std::size_t n, std::span<const Edge> edges) : SimilarityGraph(n) {
    for (const auto& e : edges) set_weight(e.i, e.j, e.w);
  }

  [[nodiscard]] std::size_t size() const { return n_; }

  [[nodiscard]] double weight(ElementId i, ElementId j) const { return w_[static_cast<std::size_t>(i) * n_ + j]; }

  void set_weight(ElementId i, ElementId j, double w) {
    if (i == j) throw DomainError("self-edge on element " + std::to_string(i));
    if (i >= n_ || j >= n_) throw DomainError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    if (!std::isfinite(w)) throw DomainError("non-finite edge weight");
    w_[static_cast<std::size_t>(i) * n_ + j] = w;
    w_[static_cast<std::size_t>(j) * n_ + i] = w;
  }

  /// Pairs i < j with nonzero weight.
  [[nodiscard]] std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (ElementId i = 0; i < n_; ++i) {
      for (ElementId j = i + 1; j < n_; ++j) {
        if (weight(i, j) != 0.0) out.push_back({i, j, weight(i, j)});
      }
    }
    return out;
  }

  [[nodiscard]] bool has_negative_weight() const {
    for (double w : w_) {
      if (w < 0.0) return true;
    }
    return false;
  }

  friend bool operator==(const SimilarityGraph&, const SimilarityGraph&) = default;

 private:
  std::size_t n_;
  std::vector<double> w_;
};

/// Subtracts the mean weight over all i < j pairs from every pair.
inline SimilarityGraph mean_center(const SimilarityGraph& g) {
  const std::size_t n = g.size();
  if (n < 2) throw DomainError("mean centering needs at least two elements");
  double sum = 0.0;
  for (ElementId i = 0; i < n; ++i) {
    for (ElementId j = i + 1; j < n; ++j) sum += g.weight(i, j);
  }
  const double mean = sum / static_cast<double>(n * (n - 1) / 2);
  SimilarityGraph out(n);
  for (ElementId i = 0; i < n; ++i) {
    for (ElementId j = i + 1; j < n; ++j) out.set_weight(i, j, g.weight(i, j) - mean);
  }
  return out;
}

/// Pairwise cosine similarity of row vectors. Zero vectors are rejected.
inline SimilarityGraph cosine_similarity_graph(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw DomainError("no points");
  const std::size_t d = points.front().size();
  std::vector<double> norms;
  norms.reserve(points.size());
  for (std::size_t r = 0; r < points.size(); ++r) {
    if (points[r].size() != d) throw InputError("point " + std::to_string(r) + " has a different dimension");
    double s = 0.0;
    for (double x : points[r]) s += x * x;
    if (s == 0.0) throw InputError("point " + std::to_string(r) + " is the zero vector");
    norms.push_back(std::sqrt(s));
  }
  SimilarityGraph g(points.size());
  for (ElementId i = 0; i < points.size(); ++i) {
    for (ElementId j = i + 1; j < points.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += points[i][k] * points[j][k];
      g.set_weight(i, j, dot / (norms[i] * norms[j]));
    }
  }
  return g;
}

/// Within-cluster weight sums over pairs i < j.
struct ClusterAggregates {
  double pos_within = 0.0;
  double neg_within = 0.0;  // sum of |w| over negative pairs
  double total_within = 0.0;
};

template <ElementSet S>
ClusterAggregates cluster_aggregates(const S& c, const SimilarityGraph& g) {
  ClusterAggregates a;
  const auto m = c.members();
  for (std::size_t x = 0; x < m.size(); ++x) {
    for (std::size_t y = x + 1; y < m.size(); ++y) {
      const double w = g.weight(m[x], m[y]);
      a.total_within += w;
      if (w > 0.0) a.pos_within += w;
      else if (w < 0.0) a.neg_within -= w;
    }
  }
  return a;
}

namespace detail {

struct CrossSums {
  double positive = 0.0;
  double total = 0.0;
};

/// Cross-edge sums, iterating the smaller side against the larger.
template <ElementSet S>
CrossSums cross_sums(const S& left, const S& right, const SimilarityGraph& g) {
  const bool left_small = left.count() <= right.count();
  const auto small = (left_small ? left : right).members();
  const auto large = (left_small ? right : left).members();
  CrossSums out;
  for (ElementId i : small) {
    for (ElementId j : large) {
      const double w = g.weight(i, j);
      out.total += w;
      if (w > 0.0) out.positive += w;
    }
  }
  return out;
}

}  // namespace detail

/// Hierarchical correlation clustering sibling cost: positive edges crossing
/// the cut plus |negative| edges inside either side.
template <ElementSet S>
double hcc_psi(const S& left, const S& right, const SimilarityGraph& g) {
  return detail::cross_sums(left, right, g).positive + cluster_aggregates(left, g).neg_within +
         cluster_aggregates(right, g).neg_within;
}

/// Sum of positive edges inside c.
template <ElementSet S>
double hcc_heuristic(const S& c, const SimilarityGraph& g) {
  return cluster_aggregates(c, g).pos_within;
}

/// Dasgupta sibling cost (|left| + |right|) * cross weight. Requires
/// nonnegative weights.
template <ElementSet S>
double dasgupta_psi(const S& left, const S& right, const SimilarityGraph& g) {
  const auto cross = detail::cross_sums(left, right, g);
  if (cross.positive != cross.total) throw ObjectiveMismatchError("Dasgupta cost needs nonnegative weights");
  return static_cast<double>(left.count() + right.count()) * cross.total;
}

/// Sum of all edges inside c; each crosses some cut with multiplier at least 1.
template <ElementSet S>
double dasgupta_heuristic(const S& c, const SimilarityGraph& g) {
  const auto a = cluster_aggregates(c, g);
  if (a.neg_within != 0.0) throw ObjectiveMismatchError("Dasgupta cost needs nonnegative weights");
  return a.total_within;
}

namespace detail {

/// Per-search memo of cluster aggregates; cleared wholesale once it grows
/// past kLimit entries.
template <ElementSet S>
class AggregateCache {
 public:
  static constexpr std::size_t kLimit = std::size_t{1} << 21;

  explicit AggregateCache(const SimilarityGraph& g) : g_(&g) {}

  const ClusterAggregates& get(const S& c) {
    auto it = memo_.find(c);
    if (it != memo_.end()) return it->second;
    if (memo_.size() >= kLimit) memo_.clear();
    return memo_.emplace(c, cluster_aggregates(c, *g_)).first->second;
  }

  [[nodiscard]] const SimilarityGraph& graph() const { return *g_; }

 private:
  const SimilarityGraph* g_;
  std::unordered_map<S, ClusterAggregates, ClusterHash> memo_;
};

}  // namespace detail

enum class GraphHeuristic { kZero, kObjective };

/// Hierarchical correlation clustering over a similarity graph.
template <ElementSet S>
class HccModel {
 public:
  using Cluster = S;

  explicit HccModel(const SimilarityGraph& g, GraphHeuristic h = GraphHeuristic::kObjective)
      : cache_(g), heuristic_(h) {}

  double psi(const S& left, const S& right) {
    const double cross_pos = detail::cross_sums(left, right, cache_.graph()).positive;
    return cross_pos + cache_.get(left).neg_within + cache_.get(right).neg_within;
  }

  double heuristic(const S& c) {
    if (heuristic_ == GraphHeuristic::kZero || c.count() < 2) return 0.0;
    return cache_.get(c).pos_within;
  }

  [[nodiscard]] std::size_t element_count() const { return cache_.graph().size(); }

 private:
  detail::AggregateCache<S> cache_;
  GraphHeuristic heuristic_;
};

/// Dasgupta's cost over a nonnegative similarity graph.
template <ElementSet S>
class DasguptaModel {
 public:
  using Cluster = S;

  explicit DasguptaModel(const SimilarityGraph& g, GraphHeuristic h = GraphHeuristic::kObjective)
      : cache_(g), heuristic_(h) {
    if (g.has_negative_weight()) throw ObjectiveMismatchError("Dasgupta cost needs nonnegative weights");
  }

  double psi(const S& left, const S& right) {
    const double cross = detail::cross_sums(left, right, cache_.graph()).total;
    return static_cast<double>(left.count() + right.count()) * cross;
  }

  double heuristic(const S& c) {
    if (heuristic_ == GraphHeuristic::kZero || c.count() < 2) return 0.0;
    return cache_.get(c).total_within;
  }

  [[nodiscard]] std::size_t element_count() const { return cache_.graph().size(); }

 private:
  detail::AggregateCache<S> cache_;
  GraphHeuristic heuristic_;
};

}  // namespace trellis_astar
