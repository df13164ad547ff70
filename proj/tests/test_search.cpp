#include <gtest/gtest.h>

#include "test_support.hpp"
#include "trellis_astar/baselines.hpp"
#include "trellis_astar/core.hpp"
#include "trellis_astar/ginkgo.hpp"
#include "trellis_astar/graph_costs.hpp"
#include "trellis_astar/search.hpp"

namespace ta = trellis_astar;
using ta::SmallCluster;
using ta::testing::set_of;
using T = ta::Trellis<SmallCluster>;
using Hcc = ta::HccModel<SmallCluster>;
using Dasgupta = ta::DasguptaModel<SmallCluster>;
using Ginkgo = ta::GinkgoModel<SmallCluster>;

namespace {

ta::SimilarityGraph dasgupta3() {
  ta::SimilarityGraph g(3);
  g.set_weight(0, 1, 1.0);
  return g;
}

template <class M>
void expect_matches_oracle(M& m, const std::string& label) {
  auto t = T::full(m.element_count());
  const auto r = ta::astar_search(t, m);
  const auto orc = ta::brute_force_map(m);
  EXPECT_TRUE(ta::costs_close(r.cost, orc.cost)) << label << ": " << r.cost << " vs " << orc.cost;
  EXPECT_TRUE(ta::costs_close(r.cost, ta::tree_cost(r.tree, m))) << label;
  EXPECT_LE(r.stats.nodes_explored, t.node_count()) << label;
  EXPECT_LE(r.stats.iterations, t.node_count()) << label;
}

}  // namespace

TEST(Search, SingleElement) {
  ta::SimilarityGraph g(1);
  Hcc m(g);
  auto t = T::full(1);
  const auto r = ta::astar_search(t, m);
  EXPECT_EQ(r.cost, 0.0);
  EXPECT_EQ(r.tree.clusters(), std::vector<SmallCluster>{set_of({0})});
}

TEST(Search, TwoElementHcc) {
  ta::SimilarityGraph g(2);
  g.set_weight(0, 1, 0.5);
  Hcc m(g);
  auto t = T::full(2);
  EXPECT_DOUBLE_EQ(ta::astar_search(t, m).cost, 0.5);
}

TEST(Search, DasguptaThreeElementsMergesZeroOneFirst) {
  const auto g = dasgupta3();
  Dasgupta m(g);
  auto t = T::full(3);
  const auto r = ta::astar_search(t, m);
  EXPECT_DOUBLE_EQ(r.cost, 2.0);
  EXPECT_EQ(r.tree.children(set_of({0, 1, 2})), std::make_pair(set_of({0, 1}), set_of({2})));
}

TEST(Search, ExploreLeavesEntries) {
  const auto g = dasgupta3();
  Dasgupta m(g);
  auto t = T::full(3);
  ta::TrellisSearch<Dasgupta> s(t, m);
  s.explore_leaves({set_of({0, 1})});
  const auto& q = *t.node(set_of({0, 1})).queue;
  ASSERT_EQ(q.size(), 1U);
  EXPECT_EQ(q.top().g, m.psi(set_of({0}), set_of({1})));
  EXPECT_EQ(q.top().h, 0.0);
  s.explore_leaves({set_of({0, 1, 2})});
  EXPECT_EQ(t.node(set_of({0, 1, 2})).queue->size(), 3U);
  EXPECT_THROW(s.explore_leaves({set_of({0, 4})}), ta::MissingNodeError);
}

TEST(Search, ComputeGAndH) {
  const auto g = dasgupta3();
  Dasgupta m(g);
  auto t = T::full(3);
  ta::TrellisSearch<Dasgupta> s(t, m);
  EXPECT_EQ(s.compute_g(set_of({0}), set_of({1})), m.psi(set_of({0}), set_of({1})));
  EXPECT_EQ(s.compute_h(set_of({0}), set_of({1})), 0.0);
  EXPECT_EQ(s.compute_h(set_of({0}), set_of({1, 2})), m.heuristic(set_of({1, 2})));
  s.explore_leaves({set_of({0, 1})});
  const double inner = t.node(set_of({0, 1})).queue->top().g;
  EXPECT_EQ(s.compute_g(set_of({0, 1}), set_of({2})), m.psi(set_of({0, 1}), set_of({2})) + inner);
  EXPECT_EQ(s.compute_h(set_of({0, 1}), set_of({2})), 0.0);
}

TEST(Search, PropagateOnTwoElementRootKeepsEntry) {
  ta::SimilarityGraph g(2);
  g.set_weight(0, 1, 0.5);
  Hcc m(g);
  auto t = T::full(2);
  ta::TrellisSearch<Hcc> s(t, m);
  s.explore_leaves({t.root()});
  const auto before = t.node(t.root()).queue->top();
  s.propagate_updates(ta::extract_state(t));
  const auto after = t.node(t.root()).queue->top();
  EXPECT_EQ(before.g, after.g);
  EXPECT_EQ(before.h, after.h);
  EXPECT_EQ(s.stats().heap_pops, 1U);
}

TEST(Search, OracleEquivalenceAllModels) {
  for (std::size_t n = 2; n <= 7; ++n) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto g = ta::testing::random_graph(n, 1000 * n + seed);
      Hcc hcc(g);
      expect_matches_oracle(hcc, "hcc");
      const auto gp = ta::testing::random_graph(n, 2000 * n + seed, true);
      Dasgupta das(gp);
      expect_matches_oracle(das, "dasgupta");
      const auto jet = ta::testing::jet_with_leaves(n, 3000 * n + seed);
      Ginkgo gk(jet);
      expect_matches_oracle(gk, "ginkgo");
    }
  }
}

TEST(Search, ZeroHeuristicIsSound) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto jet = ta::testing::small_jet(seed, 7);
    Ginkgo zero(jet, ta::GinkgoHeuristic::kZero);
    expect_matches_oracle(zero, "ginkgo zero");
    const auto g = ta::testing::random_graph(2 + seed % 6, seed);
    Hcc hz(g, ta::GraphHeuristic::kZero);
    expect_matches_oracle(hz, "hcc zero");
  }
}

TEST(Search, InformedHeuristicExploresNoMoreThanZero) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto jet = ta::testing::small_jet(seed, 8);
    Ginkgo h0(jet);
    Ginkgo zero(jet, ta::GinkgoHeuristic::kZero);
    auto t0 = T::full(jet.size());
    auto tz = T::full(jet.size());
    const auto r0 = ta::astar_search(t0, h0);
    const auto rz = ta::astar_search(tz, zero);
    EXPECT_LE(r0.stats.nodes_explored, rz.stats.nodes_explored) << "seed " << seed;
    EXPECT_TRUE(ta::costs_close(r0.cost, rz.cost));
  }
}

TEST(Search, StatsAreConsistent) {
  const auto jet = ta::testing::jet_with_leaves(8, 5);
  Ginkgo m(jet);
  auto t = T::full(8);
  const auto r = ta::astar_search(t, m);
  EXPECT_GE(r.stats.heap_pushes, r.stats.entries_created);
  EXPECT_EQ(r.stats.heap_pushes - r.stats.entries_created, r.stats.heap_pops);
  EXPECT_GE(r.stats.iterations, 1U);
  EXPECT_GE(r.stats.wall_ms, 0.0);
  EXPECT_LE(r.stats.trees_in_trellis_log10, std::log10(135135.0) + 1e-9);
  EXPECT_GE(r.stats.trees_in_trellis_log10, 0.0);
}

TEST(Search, SparseWithoutSplitIsExhausted) {
  auto t = T::sparse(3);
  t.record_split(set_of({0, 1, 2}), set_of({0}), set_of({1, 2}));
  const auto g = dasgupta3();
  Dasgupta m(g);
  EXPECT_THROW(ta::astar_search(t, m), ta::SearchExhaustedError);
}

TEST(Search, SparseReturnsOnlyRepresentableTree) {
  auto t = T::sparse(3);
  t.record_split(set_of({0, 1, 2}), set_of({0}), set_of({1, 2}));
  t.record_split(set_of({1, 2}), set_of({1}), set_of({2}));
  const auto g = dasgupta3();
  Dasgupta m(g);
  EXPECT_DOUBLE_EQ(ta::astar_search(t, m).cost, 3.0);
}

TEST(Search, AllInfiniteIsExhausted) {
  ta::FunctionModel<SmallCluster> m(
      3, [](const SmallCluster&, const SmallCluster&) { return ta::kInfiniteCost; },
      [](const SmallCluster&) { return 0.0; });
  auto t = T::full(3);
  EXPECT_THROW(ta::astar_search(t, m), ta::SearchExhaustedError);
}

TEST(Search, MismatchedSizesRejected) {
  const auto g = dasgupta3();
  Dasgupta m(g);
  auto t = T::full(4);
  EXPECT_THROW(ta::astar_search(t, m), ta::DomainError);
}

TEST(Search, IterationCapRaises) {
  const auto jet = ta::testing::jet_with_leaves(7, 2);
  Ginkgo m(jet);
  auto t = T::full(7);
  ta::SearchOptions opt;
  opt.max_iterations = 1;
  EXPECT_THROW(ta::astar_search(t, m, static_cast<ta::NoExtender*>(nullptr), opt), ta::SearchExhaustedError);
}
