#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trellis_astar/bits.hpp"
#include "trellis_astar/errors.hpp"

namespace trellis_astar {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// A pluggable sibling-decomposable objective: psi(left, right) is the cost of
/// one sibling pair, heuristic(c) a lower-bound estimate of the best subtree
/// cost over c. Models may memoize, so both are non-const.
template <class M>
concept CostModel = ElementSet<typename M::Cluster> &&
                    requires(M& m, const typename M::Cluster& a, const typename M::Cluster& b) {
                      { m.psi(a, b) } -> std::convertible_to<double>;
                      { m.heuristic(a) } -> std::convertible_to<double>;
                      { m.element_count() } -> std::convertible_to<std::size_t>;
                    };

/// Cost model from plain callables, for ad-hoc objectives and tests.
template <ElementSet S>
class FunctionModel {
 public:
  using Cluster = S;
  using Psi = std::function<double(const S&, const S&)>;
  using Heuristic = std::function<double(const S&)>;

  FunctionModel(std::size_t n, Psi psi, Heuristic heuristic = {})
      : n_(n), psi_(std::move(psi)), heuristic_(std::move(heuristic)) {}

  double psi(const S& left, const S& right) { return psi_(left, right); }
  double heuristic(const S& c) {
    if (!heuristic_ || c.count() < 2) return 0.0;
    return heuristic_(c);
  }
  [[nodiscard]] std::size_t element_count() const { return n_; }

 private:
  std::size_t n_;
  Psi psi_;
  Heuristic heuristic_;
};

/// A binary hierarchical clustering: nested clusters rooted at the full set,
/// every non-singleton split into exactly two children, singletons at the leaves.
template <ElementSet S>
class Hierarchy {
 public:
  struct Node {
    S cluster;
    int left = -1;  // child indices into nodes(); -1 on leaves
    int right = -1;
  };

  Hierarchy() = default;

  /// Builds the hierarchy under `root` by following `splits`, which maps every
  /// non-singleton cluster to its two children. Validates the result.
  static Hierarchy from_splits(const S& root, const std::map<S, std::pair<S, S>>& splits) {
    Hierarchy h;
    h.n_ = root.count();
    if (h.n_ == 0) throw DomainError("hierarchy root is empty");
    if (root != S::full(h.n_)) throw DomainError("hierarchy root must be the full element set");
    std::vector<std::pair<S, int>> stack;  // cluster, parent slot to patch
    h.nodes_.push_back({root});
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
      auto [c, idx] = stack.back();
      stack.pop_back();
      if (c.count() < 2) continue;
      auto it = splits.find(c);
      if (it == splits.end()) throw DomainError("no split recorded for cluster " + c.to_hex());
      auto [l, r] = it->second;
      check_partition(c, l, r);
      if (r < l) std::swap(l, r);
      const int li = static_cast<int>(h.nodes_.size());
      h.nodes_.push_back({l});
      h.nodes_.push_back({r});
      h.nodes_[static_cast<std::size_t>(idx)].left = li;
      h.nodes_[static_cast<std::size_t>(idx)].right = li + 1;
      stack.emplace_back(r, li + 1);
      stack.emplace_back(l, li);
    }
    return h;
  }

  /// Builds the hierarchy produced by a sequence of n-1 agglomerative merges.
  static Hierarchy from_merges(std::size_t n, const std::vector<std::pair<S, S>>& merges) {
    if (merges.size() + 1 != n) throw DomainError("a hierarchy over n elements needs n-1 merges");
    std::map<S, std::pair<S, S>> splits;
    for (const auto& [a, b] : merges) splits.emplace(a | b, std::make_pair(a, b));
    return from_splits(S::full(n), splits);
  }

  static Hierarchy single() { return from_splits(S::singleton(0), {}); }

  [[nodiscard]] std::size_t element_count() const { return n_; }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const S& root() const { return nodes_.front().cluster; }

  /// All 2n-1 clusters, in ascending cluster order.
  [[nodiscard]] std::vector<S> clusters() const {
    std::vector<S> out;
    out.reserve(nodes_.size());
    for (const auto& nd : nodes_) out.push_back(nd.cluster);
    std::sort(out.begin(), out.end());
    return out;
  }

  [[nodiscard]] std::optional<std::pair<S, S>> children(const S& c) const {
    for (const auto& nd : nodes_) {
      if (nd.cluster == c) {
        if (nd.left < 0) return std::nullopt;
        return std::make_pair(nodes_[static_cast<std::size_t>(nd.left)].cluster,
                              nodes_[static_cast<std::size_t>(nd.right)].cluster);
      }
    }
    return std::nullopt;
  }

  /// The n-1 sibling pairs (left < right), ordered by their parent cluster.
  [[nodiscard]] std::vector<std::pair<S, S>> sibling_pairs() const {
    std::vector<std::pair<S, std::pair<S, S>>> keyed;
    for (const auto& nd : nodes_) {
      if (nd.left < 0) continue;
      keyed.push_back({nd.cluster,
                       {nodes_[static_cast<std::size_t>(nd.left)].cluster,
                        nodes_[static_cast<std::size_t>(nd.right)].cluster}});
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<S, S>> out;
    out.reserve(keyed.size());
    for (auto& k : keyed) out.push_back(std::move(k.second));
    return out;
  }

  /// Map from every non-singleton cluster to its split.
  [[nodiscard]] std::map<S, std::pair<S, S>> splits() const {
    std::map<S, std::pair<S, S>> out;
    for (const auto& nd : nodes_) {
      if (nd.left < 0) continue;
      out.emplace(nd.cluster, std::make_pair(nodes_[static_cast<std::size_t>(nd.left)].cluster,
                                              nodes_[static_cast<std::size_t>(nd.right)].cluster));
    }
    return out;
  }

  /// Same hierarchy over a different cluster representation.
  template <ElementSet T>
  [[nodiscard]] Hierarchy<T> convert() const {
    std::map<T, std::pair<T, T>> out;
    auto conv = [](const S& s) {
      T t;
      s.for_each_member([&](ElementId i) { t.insert(i); });
      return t;
    };
    for (const auto& [c, lr] : splits()) out.emplace(conv(c), std::make_pair(conv(lr.first), conv(lr.second)));
    return Hierarchy<T>::from_splits(conv(root()), out);
  }

  friend bool operator==(const Hierarchy& a, const Hierarchy& b) { return a.sibling_pairs() == b.sibling_pairs() && a.n_ == b.n_; }

  static void check_partition(const S& parent, const S& left, const S& right) {
    if (left.empty() || right.empty()) throw DomainError("split of " + parent.to_hex() + " has an empty side");
    if (left.intersects(right)) throw DomainError("split sides of " + parent.to_hex() + " overlap");
    if ((left | right) != parent) throw DomainError("split sides do not cover " + parent.to_hex());
  }

 private:
  std::size_t n_ = 0;
  std::vector<Node> nodes_;  // preorder; nodes_[0] is the root
};

/// Sibling pairs of a hierarchy, ordered by parent cluster.
template <ElementSet S>
std::vector<std::pair<S, S>> sibling_pairs(const Hierarchy<S>& h) {
  return h.sibling_pairs();
}

/// Sum of psi over all sibling pairs.
template <CostModel M>
double tree_cost(const Hierarchy<typename M::Cluster>& h, M& model) {
  double total = 0.0;
  for (const auto& [l, r] : h.sibling_pairs()) total += model.psi(l, r);
  return total;
}

/// Relative-or-absolute closeness used throughout the cost comparisons.
inline bool costs_close(double a, double b, double rel = 1e-9) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace trellis_astar
