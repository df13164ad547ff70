#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"
#include "trellis_astar/search.hpp"

namespace trellis_astar {

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline double sanitize(double psi) { return std::isnan(psi) ? kInfiniteCost : psi; }

}  // namespace detail

/// Agglomerative baseline: repeatedly merges the active pair with the
/// smallest psi, ties broken by (left, right) cluster order.
template <CostModel M>
SearchResult<typename M::Cluster> greedy(M& model) {
  using S = typename M::Cluster;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = model.element_count();
  if (n == 0) throw DomainError("greedy needs at least one element");
  std::vector<S> active;
  for (ElementId i = 0; i < n; ++i) active.push_back(S::singleton(i));
  std::vector<std::pair<S, S>> merges;
  double total = 0.0;
  while (active.size() > 1) {
    std::size_t bi = 0;
    std::size_t bj = 1;
    double best = kInfiniteCost;
    bool found = false;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double c = detail::sanitize(model.psi(active[i], active[j]));
        if (!found || c < best) {
          best = c;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    merges.emplace_back(active[bi], active[bj]);
    total += best;
    S merged = active[bi] | active[bj];
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.insert(std::lower_bound(active.begin(), active.end(), merged), merged);
  }
  SearchResult<S> result;
  result.cost = total;
  result.tree = n == 1 ? Hierarchy<S>::single() : Hierarchy<S>::from_merges(n, merges);
  result.stats.wall_ms = detail::elapsed_ms(start);
  return result;
}

/// Beam width used when none is given: n(n-1)/2 up to 40 elements, 1000 above.
inline std::size_t default_beam_width(std::size_t n) {
  if (n > 40) return 1000;
  return std::max<std::size_t>(1, n * (n - 1) / 2);
}

struct BeamOptions {
  std::size_t width = 0;  // 0 selects default_beam_width
  /// Drop candidates whose accumulated cost equals an already kept one.
  bool dedup = true;
  double dedup_tolerance = 1e-12;
};

template <ElementSet S>
struct BeamResult {
  SearchResult<S> best;
  /// Every complete hierarchy in the final beam, best first.
  std::vector<Hierarchy<S>> trees;
  std::vector<double> costs;
};

/// Level-synchronous beam search over partial agglomerations. Each level
/// expands every beam state by every pair merge.
template <CostModel M>
BeamResult<typename M::Cluster> beam_search(M& model, BeamOptions options = {}) {
  using S = typename M::Cluster;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = model.element_count();
  if (n == 0) throw DomainError("beam search needs at least one element");
  const std::size_t width = options.width == 0 ? default_beam_width(n) : options.width;

  struct State {
    std::vector<S> active;  // ascending
    double cost = 0.0;
    std::vector<std::pair<S, S>> merges;
  };
  struct Candidate {
    double cost;
    std::uint32_t state;
    double psi;
    std::uint32_t i;
    std::uint32_t j;
  };

  std::vector<State> beam(1);
  for (ElementId i = 0; i < n; ++i) beam[0].active.push_back(S::singleton(i));

  for (std::size_t level = 1; level < n; ++level) {
    std::vector<Candidate> cands;
    for (std::uint32_t s = 0; s < beam.size(); ++s) {
      const auto& st = beam[s];
      for (std::uint32_t i = 0; i < st.active.size(); ++i) {
        for (std::uint32_t j = i + 1; j < st.active.size(); ++j) {
          const double psi = detail::sanitize(model.psi(st.active[i], st.active[j]));
          cands.push_back({st.cost + psi, s, psi, i, j});
        }
      }
    }
    auto key = [](const Candidate& c) { return std::tie(c.cost, c.state, c.psi, c.i, c.j); };
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) { return key(a) < key(b); });

    std::vector<State> next;
    next.reserve(std::min(width, cands.size()));
    for (const auto& c : cands) {
      if (next.size() >= width) break;
      if (options.dedup && !next.empty()) {
        const double last = next.back().cost;
        if (last == c.cost || std::abs(last - c.cost) <= options.dedup_tolerance) continue;
      }
      const auto& st = beam[c.state];
      State ns;
      ns.cost = c.cost;
      ns.merges = st.merges;
      ns.merges.emplace_back(st.active[c.i], st.active[c.j]);
      S merged = st.active[c.i] | st.active[c.j];
      ns.active.reserve(st.active.size() - 1);
      for (std::uint32_t k = 0; k < st.active.size(); ++k) {
        if (k != c.i && k != c.j) ns.active.push_back(st.active[k]);
      }
      ns.active.insert(std::lower_bound(ns.active.begin(), ns.active.end(), merged), merged);
      next.push_back(std::move(ns));
    }
    beam = std::move(next);
  }

  BeamResult<S> out;
  for (const auto& st : beam) {
    out.trees.push_back(n == 1 ? Hierarchy<S>::single() : Hierarchy<S>::from_merges(n, st.merges));
    out.costs.push_back(st.cost);
  }
  out.best.cost = out.costs.front();
  out.best.tree = out.trees.front();
  out.best.stats.wall_ms = detail::elapsed_ms(start);
  return out;
}

template <ElementSet S>
struct OracleResult {
  double cost = 0.0;
  Hierarchy<S> tree;
  std::uint64_t tree_count = 0;
};

/// Largest n the enumeration oracle accepts; 17!! = 34,459,425 trees at n = 10.
inline constexpr std::size_t kOracleMaxElements = 10;

/// Exhaustive enumeration of all (2n-3)!! binary hierarchies. Each tree is
/// produced once by always splitting off the part that holds the smallest
/// element; its cost is accumulated along the enumeration path.
template <CostModel M>
OracleResult<typename M::Cluster> brute_force_map(M& model) {
  using S = typename M::Cluster;
  const std::size_t n = model.element_count();
  if (n == 0) throw DomainError("oracle needs at least one element");
  if (n > kOracleMaxElements) {
    throw CapacityError("oracle enumeration is capped at " + std::to_string(kOracleMaxElements) + " elements");
  }
  auto to_set = [](std::uint32_t mask) {
    S s;
    for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) s.insert(static_cast<ElementId>(std::countr_zero(bits)));
    return s;
  };

  struct Split {
    std::uint32_t left;
    std::uint32_t right;
    double psi;
  };
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<std::vector<Split>> splits(full + 1);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    if (std::popcount(mask) < 2) continue;
    const std::uint32_t low = mask & (~mask + 1);
    const std::uint32_t rest = mask ^ low;
    // left = low + any proper subset of rest (right must stay nonempty)
    for (std::uint32_t sub = (rest - 1) & rest;; sub = (sub - 1) & rest) {
      const std::uint32_t left = low | sub;
      const std::uint32_t right = mask ^ left;
      splits[mask].push_back({left, right, detail::sanitize(model.psi(to_set(left), to_set(right)))});
      if (sub == 0) break;
    }
  }

  OracleResult<S> out;
  out.cost = kInfiniteCost;
  std::vector<std::uint32_t> pending;
  std::vector<std::pair<std::uint32_t, const Split*>> chosen;
  std::vector<std::pair<std::uint32_t, const Split*>> best_chosen;
  bool have_best = false;

  auto rec = [&](auto&& self, double cost) -> void {
    if (pending.empty()) {
      ++out.tree_count;
      if (!have_best || cost < out.cost) {
        out.cost = cost;
        best_chosen = chosen;
        have_best = true;
      }
      return;
    }
    const std::uint32_t mask = pending.back();
    pending.pop_back();
    for (const auto& sp : splits[mask]) {
      chosen.emplace_back(mask, &sp);
      const std::size_t before = pending.size();
      if (std::popcount(sp.left) > 1) pending.push_back(sp.left);
      if (std::popcount(sp.right) > 1) pending.push_back(sp.right);
      self(self, cost + sp.psi);
      pending.resize(before);
      chosen.pop_back();
    }
    pending.push_back(mask);
  };

  if (n == 1) {
    out.cost = 0.0;
    out.tree = Hierarchy<S>::single();
    out.tree_count = 1;
    return out;
  }
  pending.push_back(full);
  rec(rec, 0.0);

  std::map<S, std::pair<S, S>> tree_splits;
  for (const auto& [mask, sp] : best_chosen) tree_splits.emplace(to_set(mask), std::make_pair(to_set(sp->left), to_set(sp->right)));
  out.tree = Hierarchy<S>::from_splits(to_set(full), tree_splits);
  return out;
}

/// (2n-3)!! for n >= 2; 1 for n = 1.
inline std::uint64_t tree_count_closed_form(std::size_t n) {
  std::uint64_t out = 1;
  for (std::uint64_t k = 3; n >= 2 && k <= 2 * n - 3; k += 2) out *= k;
  return out;
}

}  // namespace trellis_astar
