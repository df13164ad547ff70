#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "test_support.hpp"
#include "trellis_astar/baselines.hpp"
#include "trellis_astar/core.hpp"
#include "trellis_astar/graph_costs.hpp"

namespace ta = trellis_astar;
using ta::SmallCluster;
using ta::testing::set_of;
using H = ta::Hierarchy<SmallCluster>;

namespace {

H merge_01_first() {
  return H::from_merges(3, {{set_of({0}), set_of({1})}, {set_of({0, 1}), set_of({2})}});
}

/// Random hierarchy over n elements by random agglomeration.
H random_hierarchy(std::size_t n, std::mt19937_64& rng) {
  std::vector<SmallCluster> active;
  for (ta::ElementId i = 0; i < n; ++i) active.push_back(SmallCluster::singleton(i));
  std::vector<std::pair<SmallCluster, SmallCluster>> merges;
  while (active.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    merges.emplace_back(active[a], active[b]);
    const auto merged = active[a] | active[b];
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(std::max(a, b)));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(std::min(a, b)));
    active.push_back(merged);
  }
  return H::from_merges(n, merges);
}

}  // namespace

TEST(TreeCost, SingleElementCostsZero) {
  ta::SimilarityGraph g(1);
  ta::HccModel<SmallCluster> m(g);
  EXPECT_EQ(ta::tree_cost(H::single(), m), 0.0);
  EXPECT_TRUE(ta::sibling_pairs(H::single()).empty());
}

TEST(TreeCost, HccTwoElements) {
  ta::SimilarityGraph g(2);
  g.set_weight(0, 1, 0.5);
  ta::HccModel<SmallCluster> m(g);
  const auto h = H::from_merges(2, {{set_of({0}), set_of({1})}});
  EXPECT_DOUBLE_EQ(ta::tree_cost(h, m), 0.5);
}

TEST(TreeCost, DasguptaThreeElementsMergingZeroOneFirst) {
  ta::SimilarityGraph g(3);
  g.set_weight(0, 1, 1.0);
  ta::DasguptaModel<SmallCluster> m(g);
  EXPECT_DOUBLE_EQ(ta::tree_cost(merge_01_first(), m), 2.0);
  EXPECT_DOUBLE_EQ(ta::brute_force_map(m).cost, 2.0);
}

TEST(SiblingPairs, SmallCases) {
  const auto two = H::from_merges(2, {{set_of({1}), set_of({0})}});
  EXPECT_EQ(ta::sibling_pairs(two), (std::vector<std::pair<SmallCluster, SmallCluster>>{{set_of({0}), set_of({1})}}));
  EXPECT_EQ(ta::sibling_pairs(merge_01_first()),
            (std::vector<std::pair<SmallCluster, SmallCluster>>{{set_of({0}), set_of({1})},
                                                                 {set_of({0, 1}), set_of({2})}}));
}

TEST(Hierarchy, CountsHoldForRandomTrees) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 30; ++n) {
    const auto h = random_hierarchy(n, rng);
    EXPECT_EQ(h.sibling_pairs().size(), n - 1);
    EXPECT_EQ(h.clusters().size(), 2 * n - 1);
    EXPECT_EQ(h.root(), SmallCluster::full(n));
    for (const auto& [l, r] : h.sibling_pairs()) {
      EXPECT_FALSE(l.intersects(r));
      const auto cs = h.clusters();
      EXPECT_TRUE(std::binary_search(cs.begin(), cs.end(), l | r));
    }
  }
}

TEST(Hierarchy, SiblingPairsSortedByParent) {
  std::mt19937_64 rng(5);
  const auto h = random_hierarchy(12, rng);
  const auto pairs = h.sibling_pairs();
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    EXPECT_LT(pairs[i - 1].first | pairs[i - 1].second, pairs[i].first | pairs[i].second);
  }
}

TEST(Hierarchy, RejectsInvalidStructures) {
  std::map<SmallCluster, std::pair<SmallCluster, SmallCluster>> splits;
  splits[set_of({0, 1, 2})] = {set_of({0, 1}), set_of({1, 2})};  // overlap
  EXPECT_THROW(H::from_splits(set_of({0, 1, 2}), splits), ta::DomainError);
  splits[set_of({0, 1, 2})] = {set_of({0}), set_of({1})};  // misses 2
  EXPECT_THROW(H::from_splits(set_of({0, 1, 2}), splits), ta::DomainError);
  splits[set_of({0, 1, 2})] = {set_of({0}), set_of({1, 2})};  // {1,2} has no split
  EXPECT_THROW(H::from_splits(set_of({0, 1, 2}), splits), ta::DomainError);
  EXPECT_THROW(H::from_splits(set_of({1, 2}), {}), ta::DomainError);  // root is not {0..n-1}
  EXPECT_THROW(H::from_merges(3, {{set_of({0}), set_of({1})}}), ta::DomainError);
}

TEST(Hierarchy, ConvertsBetweenClusterTypes) {
  std::mt19937_64 rng(3);
  const auto h = random_hierarchy(9, rng);
  const auto big = h.convert<ta::LargeCluster>();
  EXPECT_EQ(big.convert<SmallCluster>(), h);
  EXPECT_EQ(big.element_count(), 9U);
}

TEST(TreeCost, InvariantUnderPairPermutationAndSwap) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rep % 8;
    const auto g = ta::testing::random_graph(n, 100 + rep);
    ta::HccModel<SmallCluster> m(g);
    const auto h = random_hierarchy(n, rng);
    const double base = ta::tree_cost(h, m);
    auto pairs = h.sibling_pairs();
    std::shuffle(pairs.begin(), pairs.end(), rng);
    double shuffled = 0.0;
    double swapped = 0.0;
    for (const auto& [l, r] : pairs) {
      shuffled += m.psi(l, r);
      swapped += m.psi(r, l);
    }
    EXPECT_TRUE(ta::costs_close(base, shuffled));
    EXPECT_TRUE(ta::costs_close(base, swapped));
  }
}

TEST(FunctionModel, WrapsCallables) {
  ta::FunctionModel<SmallCluster> m(
      3, [](const SmallCluster& a, const SmallCluster& b) { return static_cast<double>(a.count() * b.count()); },
      [](const SmallCluster& c) { return static_cast<double>(c.count()); });
  EXPECT_EQ(m.psi(set_of({0}), set_of({1, 2})), 2.0);
  EXPECT_EQ(m.heuristic(set_of({1})), 0.0);
  EXPECT_EQ(m.heuristic(set_of({0, 1})), 2.0);
  EXPECT_EQ(m.element_count(), 3U);
  static_assert(ta::CostModel<ta::FunctionModel<SmallCluster>>);
}

TEST(CostsClose, RelativeAndInfinite) {
  EXPECT_TRUE(ta::costs_close(1e12, 1e12 + 1.0));
  EXPECT_FALSE(ta::costs_close(1.0, 1.0 + 1e-6));
  EXPECT_TRUE(ta::costs_close(ta::kInfiniteCost, ta::kInfiniteCost));
  EXPECT_FALSE(ta::costs_close(ta::kInfiniteCost, 1.0));
}
