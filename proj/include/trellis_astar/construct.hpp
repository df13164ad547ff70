#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "trellis_astar/bits.hpp"
#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"
#include "trellis_astar/search.hpp"
#include "trellis_astar/trellis.hpp"

namespace trellis_astar {

enum class SamplerMode { kBestK, kImportance };

struct ExtenderConfig {
  SamplerMode mode = SamplerMode::kBestK;
  /// Splits kept per explored node.
  std::size_t k = 5;
  /// Candidate splits drawn per explored node (capped by the split count).
  std::size_t pool = 1000;
  std::uint64_t seed = 0;
  /// New nodes one search may add before sampling stops. Past the budget a
  /// node with no recorded pair gets only its single best candidate, which
  /// may dead-end; an initialized trellis keeps a finite path regardless.
  std::size_t node_budget = std::numeric_limits<std::size_t>::max();

  void validate() const {
    if (k < 1 || pool < k) throw DomainError("extender needs 1 <= k <= pool");
  }
};

/// Draws candidate splits of c and keeps k of them: the k smallest psi
/// (best-k) or k draws without replacement weighted by exp(-psi) (importance).
template <CostModel M, class Rng>
std::vector<std::pair<typename M::Cluster, typename M::Cluster>> sample_splits(const typename M::Cluster& c,
                                                                               const ExtenderConfig& cfg, M& model,
                                                                               Rng& rng) {
  using S = typename M::Cluster;
  cfg.validate();
  const std::size_t size = c.count();
  if (size < 2) throw DomainError("cannot split a cluster with fewer than two elements");
  const std::uint64_t total = split_count(size);

  std::vector<std::pair<S, S>> cands;
  if (total <= cfg.pool) {
    cands.reserve(static_cast<std::size_t>(total));
    for_each_split(c, [&](const S& l, const S& r) { cands.emplace_back(l, r); });
  } else {
    // Uniform over canonical splits: the highest member always goes right,
    // every other member flips a fair coin; empty left sides are redrawn.
    const auto members = c.members();
    std::unordered_set<S, ClusterHash> seen;
    while (cands.size() < cfg.pool) {
      S left;
      std::uint64_t bits = 0;
      for (std::size_t i = 0; i + 1 < members.size(); ++i) {
        if (i % 64 == 0) bits = rng();
        if ((bits >> (i % 64)) & 1U) left.insert(members[i]);
      }
      if (left.empty() || !seen.insert(left).second) continue;
      cands.emplace_back(left, c - left);
    }
  }

  std::vector<double> psi(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    psi[i] = model.psi(cands[i].first, cands[i].second);
    if (std::isnan(psi[i])) psi[i] = kInfiniteCost;
  }
  const std::size_t keep = std::min(cfg.k, cands.size());
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::pair<S, S>> out;
  out.reserve(keep);

  if (cfg.mode == SamplerMode::kBestK) {
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (psi[a] != psi[b]) return psi[a] < psi[b];
                        return cands[a].first < cands[b].first;
                      });
    for (std::size_t i = 0; i < keep; ++i) out.push_back(cands[order[i]]);
    return out;
  }

  double lo = kInfiniteCost;
  for (double v : psi) lo = std::min(lo, v);
  std::vector<double> weight(cands.size(), 0.0);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    weight[i] = std::isfinite(psi[i]) ? std::exp(std::max(-(psi[i] - lo), -745.0)) : 0.0;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<bool> taken(cands.size(), false);
  for (std::size_t draw = 0; draw < keep; ++draw) {
    double sum = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!taken[i]) sum += weight[i];
    }
    std::size_t pick = cands.size();
    if (sum > 0.0) {
      double u = unit(rng) * sum;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (taken[i] || weight[i] == 0.0) continue;
        pick = i;
        u -= weight[i];
        if (u < 0.0) break;
      }
    } else {
      // only infinite-cost candidates remain
      for (std::size_t i = 0; i < cands.size() && pick == cands.size(); ++i) {
        if (!taken[i]) pick = i;
      }
    }
    taken[pick] = true;
    out.push_back(cands[pick]);
  }
  return out;
}

/// Extends sparse trellis nodes with sampled child pairs at exploration time.
/// Each node's sample stream is seeded from (seed, cluster), so the splits a
/// node receives do not depend on exploration order.
template <ElementSet S>
class SplitExtender {
 public:
  explicit SplitExtender(ExtenderConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  /// Marks the current node count as the base for the node budget.
  void begin(const Trellis<S>& t) { base_nodes_ = t.materialized_count(); }

  template <CostModel M>
  void extend(const S& c, Trellis<S>& t, M& model) {
    if (c.count() < 2) return;
    std::mt19937_64 rng(detail::mix64(cfg_.seed ^ detail::mix64(c.hash())));
    const bool over_budget = t.materialized_count() - std::min(base_nodes_, t.materialized_count()) >= cfg_.node_budget;
    if (over_budget) {
      if (!t.find(c)->recorded.empty()) return;
      ExtenderConfig one = cfg_;
      one.k = 1;
      one.mode = SamplerMode::kBestK;
      for (const auto& [l, r] : sample_splits(c, one, model, rng)) t.record_split(c, l, r);
      ++fallback_nodes_;
      return;
    }
    for (const auto& [l, r] : sample_splits(c, cfg_, model, rng)) t.record_split(c, l, r);
  }

  [[nodiscard]] const ExtenderConfig& config() const { return cfg_; }
  [[nodiscard]] std::size_t fallback_nodes() const { return fallback_nodes_; }

 private:
  ExtenderConfig cfg_;
  std::size_t base_nodes_ = 0;
  std::size_t fallback_nodes_ = 0;
};

/// Sparse trellis holding every cluster and parent/child split of the given trees.
template <ElementSet S>
Trellis<S> init_from_trees(const std::vector<Hierarchy<S>>& trees, std::size_t n, TrellisLimits limits = {}) {
  if (trees.empty()) throw DomainError("trellis initialization needs at least one tree");
  auto t = Trellis<S>::sparse(n, limits);
  for (const auto& tree : trees) {
    if (tree.element_count() != n || tree.root() != t.root()) {
      throw DomainError("initialization tree covers a different element set");
    }
    for (const auto& [parent, lr] : tree.splits()) t.record_split(parent, lr.first, lr.second);
  }
  return t;
}

/// Repeated A* on one growing trellis. Round r + 1 keeps every pair the
/// previous rounds recorded or explored and samples more with a fresh seed,
/// so with an admissible heuristic the returned costs never increase.
template <CostModel M>
std::vector<SearchResult<typename M::Cluster>> iterative_search(Trellis<typename M::Cluster>& t, M& model,
                                                                std::size_t rounds, const ExtenderConfig& cfg,
                                                                SearchOptions options = {}) {
  using S = typename M::Cluster;
  if (rounds < 1) throw DomainError("iterative search needs at least one round");
  std::vector<SearchResult<S>> out;
  out.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    ExtenderConfig round_cfg = cfg;
    round_cfg.seed = r == 0 ? cfg.seed : detail::mix64(cfg.seed + r);
    SplitExtender<S> ext(round_cfg);
    if (r > 0) t.reset_search_state();
    ext.begin(t);
    out.push_back(astar_search(t, model, &ext, options));
  }
  return out;
}

}  // namespace trellis_astar
