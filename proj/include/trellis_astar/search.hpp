#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"
#include "trellis_astar/trellis.hpp"

namespace trellis_astar {

struct SearchStats {
  std::uint64_t nodes_explored = 0;
  std::uint64_t heap_pushes = 0;
  std::uint64_t heap_pops = 0;
  /// Outer passes that explored at least one node, plus the final goal pass.
  std::uint64_t iterations = 0;
  /// Outer passes that only refreshed stale entries along the current state.
  std::uint64_t refresh_passes = 0;
  /// Entries created by exploration (heap_pushes minus re-enqueues).
  std::uint64_t entries_created = 0;
  double wall_ms = 0.0;
  /// log10 of the number of complete hierarchies within the explored sub-trellis.
  double trees_in_trellis_log10 = 0.0;
};

template <ElementSet S>
struct SearchResult {
  double cost = 0.0;
  Hierarchy<S> tree;
  SearchStats stats;
};

/// Hook that adds child pairs to a sparse trellis node right before it is
/// explored.
template <class E, class M>
concept TrellisExtender = CostModel<M> && requires(E& e, const typename M::Cluster& c,
                                                   Trellis<typename M::Cluster>& t, M& m) { e.extend(c, t, m); };

struct NoExtender {
  template <class S, class M>
  void extend(const S&, Trellis<S>&, M&) {}
};

struct SearchOptions {
  /// Cap on outer passes (iterations plus refresh passes); default is
  /// 10 x the trellis node count.
  std::optional<std::uint64_t> max_iterations;
};

/// A* over a cluster trellis with nested per-node min-heaps.
template <CostModel M, class Ext = NoExtender>
  requires TrellisExtender<Ext, M>
class TrellisSearch {
 public:
  using S = typename M::Cluster;

  TrellisSearch(Trellis<S>& trellis, M& model, Ext* extender = nullptr, SearchOptions options = {})
      : t_(trellis), m_(model), ext_(extender), options_(options) {
    if (trellis.element_count() != model.element_count()) {
      throw DomainError("trellis covers " + std::to_string(trellis.element_count()) + " elements but the cost model has " +
                        std::to_string(model.element_count()));
    }
  }

  [[nodiscard]] const SearchStats& stats() const { return stats_; }

  /// g of the best sub-state under c: 0 for singletons and unexplored nodes,
  /// +inf for explored nodes with no child pairs.
  [[nodiscard]] double best_g(const S& c) const {
    if (c.count() < 2) return 0.0;
    const auto* nd = t_.find(c);
    if (nd == nullptr || !nd->explored()) return 0.0;
    return nd->queue->empty() ? kInfiniteCost : nd->queue->top().g;
  }

  /// h of the best sub-state under c; the heuristic itself when unexplored.
  double best_h(const S& c) {
    if (c.count() < 2) return 0.0;
    const auto* nd = t_.find(c);
    if (nd == nullptr || !nd->explored()) return m_.heuristic(c);
    return nd->queue->empty() ? 0.0 : nd->queue->top().h;
  }

  /// psi(left, right) plus the realized costs of both best sub-states.
  double compute_g(const S& left, const S& right) {
    double psi = m_.psi(left, right);
    if (std::isnan(psi)) psi = kInfiniteCost;
    return psi + best_g(left) + best_g(right);
  }

  /// Sum of heuristic values over the unexpanded leaves of both sub-states.
  double compute_h(const S& left, const S& right) { return best_h(left) + best_h(right); }

  /// Instantiates the queue of every frontier node with one entry per child pair.
  void explore_leaves(const std::vector<S>& frontier) {
    for (const auto& c : frontier) {
      if (!t_.contains(c)) throw MissingNodeError("frontier cluster " + c.to_hex() + " is not in the trellis");
      if (ext_ != nullptr && !t_.is_full()) ext_->extend(c, t_, m_);
      const auto pairs = t_.children_pairs(c);
      typename TrellisNode<S>::Queue queue;
      queue.reserve(pairs.size());
      for (const auto& [l, r] : pairs) {
        queue.push(HeapEntry<S>{compute_g(l, r), compute_h(l, r), l, r});
      }
      stats_.heap_pushes += pairs.size();
      stats_.entries_created += pairs.size();
      ++stats_.nodes_explored;
      t_.node(c).queue = std::move(queue);
    }
  }

  /// True when every top entry along the state's splits matches a fresh
  /// recomputation, so the root's f is the realized cost of the state.
  bool path_is_fresh(const PartialHierarchy<S>& state) {
    for (const auto& c : state.clusters) {
      if (c.count() < 2) continue;
      const auto& top = t_.node(c).queue->top();
      if (top.g != compute_g(top.left, top.right) || top.h != compute_h(top.left, top.right)) return false;
    }
    return true;
  }

  /// Leaves-to-root pass over the state: pop each top entry, recompute its
  /// g and h from the current child queues, re-enqueue.
  void propagate_updates(const PartialHierarchy<S>& state) {
    for (auto it = state.clusters.rbegin(); it != state.clusters.rend(); ++it) {
      if (it->count() < 2) continue;
      auto& nd = t_.node(*it);
      if (!nd.queue || nd.queue->empty()) continue;
      // Refresh until the top entry survives its own recomputation; children
      // are fixed meanwhile, so each entry is refreshed at most once here.
      for (bool fresh = false; !fresh;) {
        auto entry = nd.queue->pop();
        ++stats_.heap_pops;
        const double g = compute_g(entry.left, entry.right);
        const double h = compute_h(entry.left, entry.right);
        fresh = g == entry.g && h == entry.h;
        entry.g = g;
        entry.h = h;
        nd.queue->push(std::move(entry));
        ++stats_.heap_pushes;
      }
    }
  }

  SearchResult<S> run() {
    const auto start = std::chrono::steady_clock::now();
    const S root = t_.root();
    SearchResult<S> result;
    if (root.count() < 2) {
      result.cost = 0.0;
      result.tree = Hierarchy<S>::from_splits(root, {});
      stats_.iterations = 1;
      finish(result, start);
      return result;
    }
    for (std::uint64_t passes = 1;; ++passes) {
      const std::uint64_t cap = options_.max_iterations.value_or(
          10 * std::max<std::uint64_t>(t_.is_full() ? t_.node_count() : t_.materialized_count(), 16));
      if (passes > cap) {
        throw SearchExhaustedError("A* exceeded its iteration cap of " + std::to_string(cap) +
                                   "; the heuristic may be inconsistent with the cost model");
      }
      const auto& root_node = t_.node(root);
      if (root_node.explored()) {
        if (root_node.queue->empty()) throw SearchExhaustedError("the root has no child pairs");
        const auto& top = root_node.queue->top();
        if (!std::isfinite(top.f())) {
          throw SearchExhaustedError("every hierarchy representable in the trellis has infinite cost");
        }
      }
      auto state = extract_state(t_);
      if (root_node.explored() && root_node.queue->top().h == 0.0 && state.complete() && path_is_fresh(state)) {
        ++stats_.iterations;
        result.cost = root_node.queue->top().f();
        result.tree = Hierarchy<S>::from_splits(root, state.splits);
        break;
      }
      // A pass with nothing to explore only refreshes stale entries on the path.
      if (state.frontier.empty()) ++stats_.refresh_passes;
      else ++stats_.iterations;
      explore_leaves(state.frontier);
      propagate_updates(state);
    }
    finish(result, start);
    return result;
  }

 private:
  void finish(SearchResult<S>& result, std::chrono::steady_clock::time_point start) {
    stats_.trees_in_trellis_log10 = root_is_singleton() ? 0.0 : log10_explored_trees(t_);
    stats_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.stats = stats_;
  }
  [[nodiscard]] bool root_is_singleton() const { return t_.root().count() < 2; }

  Trellis<S>& t_;
  M& m_;
  Ext* ext_;
  SearchOptions options_;
  SearchStats stats_;
};

/// Runs A* on the trellis. On a full trellis with an admissible heuristic the
/// result is the global optimum; on a sparse trellis it is the best hierarchy
/// the trellis represents (as extended during the run, when an extender is given).
template <CostModel M, class Ext = NoExtender>
  requires TrellisExtender<Ext, M>
SearchResult<typename M::Cluster> astar_search(Trellis<typename M::Cluster>& t, M& model, Ext* extender = nullptr,
                                               SearchOptions options = {}) {
  TrellisSearch<M, Ext> search(t, model, extender, options);
  return search.run();
}

/// Explores every node reachable from the root (no early stop). Returns the
/// number of heap entries created.
template <CostModel M>
std::uint64_t explore_all(Trellis<typename M::Cluster>& t, M& model) {
  using S = typename M::Cluster;
  TrellisSearch<M> search(t, model);
  std::vector<S> pending{t.root()};
  while (!pending.empty()) {
    std::vector<S> batch;
    for (auto& c : pending) {
      if (c.count() < 2) continue;
      if (t.node(c).explored()) continue;
      batch.push_back(c);
    }
    pending.clear();
    search.explore_leaves(batch);
    for (const auto& c : batch) {
      for (const auto& e : t.node(c).queue->entries()) {
        pending.push_back(e.left);
        pending.push_back(e.right);
      }
    }
    std::sort(pending.begin(), pending.end());
    pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
  }
  return search.stats().entries_created;
}

}  // namespace trellis_astar
