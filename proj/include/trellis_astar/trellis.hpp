#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trellis_astar/bits.hpp"
#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"
#include "trellis_astar/min_heap.hpp"

namespace trellis_astar {

/// One candidate two-partition of a trellis node with its A* values.
/// f is always g + h.
template <ElementSet S>
struct HeapEntry {
  double g = 0.0;
  double h = 0.0;
  S left;
  S right;

  [[nodiscard]] double f() const { return g + h; }
};

/// Orders entries by f, then by the left cluster's bit pattern.
template <ElementSet S>
struct EntryOrder {
  bool operator()(const HeapEntry<S>& a, const HeapEntry<S>& b) const {
    const double fa = a.f();
    const double fb = b.f();
    if (fa != fb) return fa < fb;
    return a.left < b.left;
  }
};

template <ElementSet S>
struct TrellisNode {
  using Queue = MinHeap<HeapEntry<S>, EntryOrder<S>>;

  S cluster;
  /// Instantiated on exploration. Singletons are never explored.
  std::optional<Queue> queue;
  /// Child pairs recorded ahead of exploration (sparse trellises).
  std::vector<std::pair<S, S>> recorded;

  [[nodiscard]] bool explored() const { return queue.has_value(); }

  [[nodiscard]] std::optional<std::pair<S, S>> best_split() const {
    if (!queue || queue->empty()) return std::nullopt;
    return std::make_pair(queue->top().left, queue->top().right);
  }
  [[nodiscard]] std::optional<double> best_value() const {
    if (!queue || queue->empty()) return std::nullopt;
    return queue->top().f();
  }
};

/// A search state: the clusters reached by following best splits from the
/// root, and the unexplored non-singleton leaves among them.
template <ElementSet S>
struct PartialHierarchy {
  std::vector<S> clusters;  // preorder; parents precede their children
  std::vector<S> frontier;
  std::map<S, std::pair<S, S>> splits;

  [[nodiscard]] bool complete() const { return frontier.empty(); }
};

struct TrellisLimits {
  /// Upper bound on materialized nodes; exceeding it raises CapacityError.
  std::size_t max_nodes = std::numeric_limits<std::size_t>::max();
};

/// Cluster trellis over n elements. A full trellis represents every nonempty
/// subset (nodes are materialized on first access); a sparse trellis holds
/// only the nodes and child pairs that were added to it.
template <ElementSet S>
class Trellis {
 public:
  enum class Kind { kFull, kSparse };

  static Trellis full(std::size_t n, TrellisLimits limits = {}) {
    if (n == 0) throw DomainError("trellis needs at least one element");
    if (n > S::kCapacity || n > kMaxFullElements) {
      throw CapacityError("full trellis over " + std::to_string(n) + " elements exceeds the exact-mode cap of " +
                          std::to_string(std::min<std::size_t>(S::kCapacity, kMaxFullElements)));
    }
    return Trellis(Kind::kFull, n, limits);
  }

  /// Sparse trellis holding only the root.
  static Trellis sparse(std::size_t n, TrellisLimits limits = {}) {
    if (n == 0) throw DomainError("trellis needs at least one element");
    if (n > S::kCapacity) throw CapacityError("element count exceeds cluster capacity");
    return Trellis(Kind::kSparse, n, limits);
  }

  /// Largest n accepted by full(); 2^n - 1 must fit the node counter.
  static constexpr std::size_t kMaxFullElements = 62;

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool is_full() const { return kind_ == Kind::kFull; }
  [[nodiscard]] std::size_t element_count() const { return n_; }
  [[nodiscard]] const S& root() const { return root_; }
  [[nodiscard]] const TrellisLimits& limits() const { return limits_; }

  /// Nodes represented: 2^n - 1 for a full trellis.
  [[nodiscard]] std::uint64_t node_count() const {
    if (kind_ == Kind::kFull) return (std::uint64_t{1} << n_) - 1;
    return nodes_.size();
  }
  [[nodiscard]] std::size_t materialized_count() const { return nodes_.size(); }

  [[nodiscard]] bool contains(const S& c) const {
    if (c.empty()) return false;
    if (kind_ == Kind::kFull) return c.is_subset_of(root_);
    return nodes_.find(c) != nodes_.end();
  }

  [[nodiscard]] const TrellisNode<S>* find(const S& c) const {
    auto it = nodes_.find(c);
    return it == nodes_.end() ? nullptr : &it->second;
  }

  TrellisNode<S>& node(const S& c) {
    auto it = nodes_.find(c);
    if (it != nodes_.end()) return it->second;
    if (kind_ == Kind::kSparse || !contains(c)) throw MissingNodeError("cluster " + c.to_hex() + " is not in the trellis");
    return materialize(c);
  }

  /// Adds a node to a sparse trellis (no-op when present).
  TrellisNode<S>& add_node(const S& c) {
    if (c.empty() || !c.is_subset_of(root_)) throw DomainError("cluster " + c.to_hex() + " is not a subset of the root");
    auto it = nodes_.find(c);
    if (it != nodes_.end()) return it->second;
    return materialize(c);
  }

  /// Records (left, right) as a child pair of parent, adding missing nodes.
  /// Returns false when the pair was already recorded.
  bool record_split(const S& parent, S left, S right) {
    Hierarchy<S>::check_partition(parent, left, right);
    if (right < left) std::swap(left, right);
    auto& p = add_node(parent);
    for (const auto& [l, r] : p.recorded) {
      if (l == left) return false;
    }
    // Pointers into nodes_ survive rehashing; `p` stays valid.
    add_node(left);
    add_node(right);
    p.recorded.emplace_back(left, right);
    return true;
  }

  /// Child pairs of c: every canonical two-partition on a full trellis,
  /// the recorded pairs on a sparse one.
  [[nodiscard]] std::vector<std::pair<S, S>> children_pairs(const S& c) const {
    if (!contains(c)) throw MissingNodeError("cluster " + c.to_hex() + " is not in the trellis");
    std::vector<std::pair<S, S>> out;
    if (kind_ == Kind::kFull) {
      out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(split_count(c.count()), 1U << 20)));
      for_each_split(c, [&](const S& l, const S& r) { out.emplace_back(l, r); });
    } else if (const auto* nd = find(c)) {
      out = nd->recorded;
    }
    return out;
  }

  template <class F>
  void for_each_node(F&& f) const {
    for (const auto& [c, nd] : nodes_) f(nd);
  }

  /// Drops all queues, keeping every explored child pair as a recorded pair.
  /// On a full trellis this only resets the search state.
  void reset_search_state() {
    for (auto& [c, nd] : nodes_) {
      if (!nd.queue) continue;
      if (kind_ == Kind::kSparse) {
        for (const auto& e : nd.queue->entries()) {
          bool seen = false;
          for (const auto& [l, r] : nd.recorded) seen = seen || l == e.left;
          if (!seen) nd.recorded.emplace_back(e.left, e.right);
        }
      }
      nd.queue.reset();
    }
  }

  /// Total number of recorded or explored child pairs.
  [[nodiscard]] std::size_t recorded_pair_count() const {
    std::size_t total = 0;
    for (const auto& [c, nd] : nodes_) total += nd.queue ? nd.queue->size() : nd.recorded.size();
    return total;
  }

 private:
  Trellis(Kind kind, std::size_t n, TrellisLimits limits) : kind_(kind), n_(n), root_(S::full(n)), limits_(limits) {
    materialize(root_);
  }

  TrellisNode<S>& materialize(const S& c) {
    if (nodes_.size() >= limits_.max_nodes) {
      throw CapacityError("trellis node limit of " + std::to_string(limits_.max_nodes) + " reached");
    }
    auto [it, inserted] = nodes_.try_emplace(c);
    it->second.cluster = c;
    return it->second;
  }

  Kind kind_;
  std::size_t n_;
  S root_;
  TrellisLimits limits_;
  std::unordered_map<S, TrellisNode<S>, ClusterHash> nodes_;
};

/// Follows best-split pointers from the root. Stops at singletons and at
/// nodes whose queues are not yet instantiated; the latter form the frontier.
template <ElementSet S>
PartialHierarchy<S> extract_state(const Trellis<S>& t) {
  PartialHierarchy<S> state;
  std::vector<S> stack{t.root()};
  while (!stack.empty()) {
    S c = std::move(stack.back());
    stack.pop_back();
    state.clusters.push_back(c);
    if (c.count() < 2) continue;
    const auto* nd = t.find(c);
    if (nd == nullptr || !nd->explored()) {
      state.frontier.push_back(c);
      continue;
    }
    if (nd->queue->empty()) {
      throw SearchExhaustedError("node " + c.to_hex() + " has no child pairs; no hierarchy is representable");
    }
    const auto& top = nd->queue->top();
    state.splits.emplace(c, std::make_pair(top.left, top.right));
    stack.push_back(top.right);
    stack.push_back(top.left);
  }
  return state;
}

/// log10 of the number of complete hierarchies representable using only
/// explored nodes (singletons count as one tree, unexplored nodes as none).
/// Returns -inf when none is representable.
template <ElementSet S>
double log10_explored_trees(const Trellis<S>& t) {
  std::unordered_map<S, double, ClusterHash> memo;
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  // Iterative post-order over explored nodes, children first.
  std::vector<std::pair<S, bool>> stack{{t.root(), false}};
  while (!stack.empty()) {
    auto [c, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(c) != 0) continue;
    if (c.count() < 2) {
      memo.emplace(c, 0.0);
      continue;
    }
    const auto* nd = t.find(c);
    if (nd == nullptr || !nd->explored() || nd->queue->empty()) {
      memo.emplace(c, kNone);
      continue;
    }
    if (!expanded) {
      stack.emplace_back(c, true);
      for (const auto& e : nd->queue->entries()) {
        if (memo.count(e.left) == 0) stack.emplace_back(e.left, false);
        if (memo.count(e.right) == 0) stack.emplace_back(e.right, false);
      }
      continue;
    }
    double best = kNone;
    std::vector<double> terms;
    terms.reserve(nd->queue->size());
    for (const auto& e : nd->queue->entries()) {
      const double v = memo.at(e.left) + memo.at(e.right);
      if (v == kNone) continue;
      terms.push_back(v);
      best = std::max(best, v);
    }
    if (best == kNone) {
      memo.emplace(c, kNone);
      continue;
    }
    double acc = 0.0;
    for (double v : terms) acc += std::pow(10.0, v - best);
    memo.emplace(c, best + std::log10(acc));
  }
  return memo.at(t.root());
}

}  // namespace trellis_astar
