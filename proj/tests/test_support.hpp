#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "trellis_astar/bits.hpp"
#include "trellis_astar/ginkgo.hpp"
#include "trellis_astar/graph_costs.hpp"

namespace trellis_astar::testing {

template <class S = SmallCluster>
S set_of(std::initializer_list<ElementId> ids) {
  S s;
  for (auto i : ids) s.insert(i);
  return s;
}

/// Dense graph with weights drawn from N(0, 1), or |N(0, 1)| when nonnegative.
inline SimilarityGraph random_graph(std::size_t n, std::uint64_t seed, bool nonnegative = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SimilarityGraph g(n);
  for (ElementId i = 0; i < n; ++i) {
    for (ElementId j = i + 1; j < n; ++j) {
      const double w = normal(rng);
      g.set_weight(i, j, nonnegative ? std::abs(w) : w);
    }
  }
  return g;
}

/// Generated jet with exactly n leaves.
inline JetEvent jet_with_leaves(std::size_t n, std::uint64_t seed, double t_root = 100.0) {
  JetGeneratorParams p;
  p.seed = seed;
  p.t_root = t_root;
  p.min_leaves = n;
  p.max_leaves = n;
  return generate_jet(p);
}

/// Generated jet with between 2 and max_n leaves.
inline JetEvent small_jet(std::uint64_t seed, std::size_t max_n = 8) {
  JetGeneratorParams p;
  p.seed = seed;
  p.min_leaves = 2;
  p.max_leaves = max_n;
  return generate_jet(p);
}

/// Minimal subtree cost of every subset of {0..n-1}, indexed by bit mask.
template <class M>
std::vector<double> subset_optima(M& model, std::size_t n) {
  std::vector<double> best(std::size_t{1} << n, 0.0);
  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    SmallCluster c;
    for (ElementId i = 0; i < n; ++i) {
      if ((mask >> i) & 1U) c.insert(i);
    }
    if (c.count() < 2) continue;
    double b = kInfiniteCost;
    for_each_split(c, [&](const SmallCluster& l, const SmallCluster& r) {
      std::uint32_t lm = 0;
      for (auto e : l.members()) lm |= 1U << e;
      b = std::min(b, model.psi(l, r) + best[lm] + best[mask ^ lm]);
    });
    best[mask] = b;
  }
  return best;
}

inline SmallCluster mask_to_set(std::uint32_t mask) {
  SmallCluster c;
  for (ElementId i = 0; mask >> i; ++i) {
    if ((mask >> i) & 1U) c.insert(i);
  }
  return c;
}

}  // namespace trellis_astar::testing
