#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "test_support.hpp"
#include "trellis_astar/baselines.hpp"
#include "trellis_astar/construct.hpp"
#include "trellis_astar/ginkgo.hpp"
#include "trellis_astar/graph_costs.hpp"
#include "trellis_astar/search.hpp"

namespace ta = trellis_astar;
using ta::SmallCluster;
using ta::testing::set_of;
using H = ta::Hierarchy<SmallCluster>;
using Hcc = ta::HccModel<SmallCluster>;
using Ginkgo = ta::GinkgoModel<SmallCluster>;
using Pairs = std::vector<std::pair<SmallCluster, SmallCluster>>;

namespace {

/// Every binary hierarchy over {0..n-1}.
std::vector<H> all_trees(std::size_t n) {
  using Splits = std::map<SmallCluster, std::pair<SmallCluster, SmallCluster>>;
  std::function<std::vector<Splits>(const SmallCluster&)> rec = [&](const SmallCluster& c) {
    if (c.count() < 2) return std::vector<Splits>{Splits{}};
    std::vector<Splits> out;
    ta::for_each_split(c, [&](const SmallCluster& l, const SmallCluster& r) {
      for (const auto& a : rec(l)) {
        for (const auto& b : rec(r)) {
          Splits s = a;
          s.insert(b.begin(), b.end());
          s.emplace(c, std::make_pair(l, r));
          out.push_back(std::move(s));
        }
      }
    });
    return out;
  };
  std::vector<H> trees;
  for (const auto& s : rec(SmallCluster::full(n))) trees.push_back(H::from_splits(SmallCluster::full(n), s));
  return trees;
}

double representable_trees_log10(ta::Trellis<SmallCluster>& t, Hcc& m) {
  ta::explore_all(t, m);
  return ta::log10_explored_trees(t);
}

ta::ExtenderConfig all_splits_config() {
  ta::ExtenderConfig cfg;
  cfg.k = 1U << 20;
  cfg.pool = 1U << 20;
  return cfg;
}

}  // namespace

TEST(InitFromTrees, SingleTreeReturnsItsCost) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = ta::testing::random_graph(9, seed);
    Hcc m(g);
    const auto gr = ta::greedy(m);
    auto t = ta::init_from_trees<SmallCluster>({gr.tree}, 9);
    const auto r = ta::astar_search(t, m);
    EXPECT_TRUE(ta::costs_close(r.cost, gr.cost));
    EXPECT_EQ(r.tree, gr.tree);
  }
}

TEST(InitFromTrees, TwoTreesSharingRootSplit) {
  const auto a = H::from_merges(4, {{set_of({0}), set_of({1})}, {set_of({2}), set_of({3})}, {set_of({0, 1}), set_of({2, 3})}});
  const auto b = H::from_merges(4, {{set_of({1}), set_of({0})}, {set_of({3}), set_of({2})}, {set_of({0, 1}), set_of({2, 3})}});
  const auto c = H::from_merges(4, {{set_of({0}), set_of({1})}, {set_of({0, 1}), set_of({2})}, {set_of({0, 1, 2}), set_of({3})}});
  const auto g = ta::testing::random_graph(4, 1);
  Hcc m(g);
  auto same = ta::init_from_trees<SmallCluster>({a, b}, 4);
  EXPECT_NEAR(representable_trees_log10(same, m), 0.0, 1e-12);  // a and b are the same tree
  auto two = ta::init_from_trees<SmallCluster>({a, c}, 4);
  EXPECT_GE(representable_trees_log10(two, m), std::log10(2.0) - 1e-12);
}

TEST(InitFromTrees, AllTreesMatchOracle) {
  const auto trees = all_trees(4);
  ASSERT_EQ(trees.size(), 15U);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = ta::testing::random_graph(4, seed);
    Hcc m(g);
    auto t = ta::init_from_trees(trees, 4);
    EXPECT_EQ(t.materialized_count(), 15U);
    EXPECT_TRUE(ta::costs_close(ta::astar_search(t, m).cost, ta::brute_force_map(m).cost));
  }
}

TEST(InitFromTrees, RecombinationOnlyImproves) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto jet = ta::testing::jet_with_leaves(10, seed);
    Ginkgo m(jet);
    const auto beam = ta::beam_search(m);
    auto t = ta::init_from_trees(beam.trees, 10);
    const auto r = ta::astar_search(t, m);
    EXPECT_LE(r.cost, beam.best.cost + 1e-9 * std::abs(beam.best.cost));
  }
}

TEST(InitFromTrees, Errors) {
  EXPECT_THROW(ta::init_from_trees<SmallCluster>({}, 3), ta::DomainError);
  const auto a = H::from_merges(2, {{set_of({0}), set_of({1})}});
  EXPECT_THROW(ta::init_from_trees<SmallCluster>({a}, 3), ta::DomainError);
}

TEST(SampleSplits, LargePoolReturnsAllSplits) {
  const auto g = ta::testing::random_graph(6, 2);
  Hcc m(g);
  std::mt19937_64 rng(0);
  const auto c = set_of({0, 1, 3, 4, 5});
  const auto out = ta::sample_splits(c, all_splits_config(), m, rng);
  EXPECT_EQ(out.size(), 15U);
  std::set<SmallCluster> lefts;
  for (const auto& [l, r] : out) {
    EXPECT_EQ(l | r, c);
    lefts.insert(std::min(l, r));
  }
  EXPECT_EQ(lefts.size(), 15U);
}

TEST(SampleSplits, BestOneIsPsiMinimizer) {
  const auto g = ta::testing::random_graph(7, 3);
  Hcc m(g);
  std::mt19937_64 rng(0);
  ta::ExtenderConfig cfg;
  cfg.k = 1;
  const auto c = SmallCluster::full(7);
  const auto out = ta::sample_splits(c, cfg, m, rng);
  ASSERT_EQ(out.size(), 1U);
  double best = ta::kInfiniteCost;
  ta::for_each_split(c, [&](const SmallCluster& l, const SmallCluster& r) { best = std::min(best, m.psi(l, r)); });
  EXPECT_EQ(m.psi(out[0].first, out[0].second), best);
}

TEST(SampleSplits, DeterministicAndDistinct) {
  const auto jet = ta::testing::jet_with_leaves(30, 1, 1000.0);
  ta::GinkgoModel<ta::SmallCluster> m(jet);
  for (auto mode : {ta::SamplerMode::kBestK, ta::SamplerMode::kImportance}) {
    ta::ExtenderConfig cfg;
    cfg.mode = mode;
    cfg.k = 8;
    cfg.pool = 200;
    std::mt19937_64 r1(42);
    std::mt19937_64 r2(42);
    const auto a = ta::sample_splits(SmallCluster::full(30), cfg, m, r1);
    const auto b = ta::sample_splits(SmallCluster::full(30), cfg, m, r2);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 8U);
    std::set<SmallCluster> lefts;
    for (const auto& [l, r] : a) lefts.insert(std::min(l, r));
    EXPECT_EQ(lefts.size(), 8U);
  }
}

TEST(SampleSplits, RejectsBadConfig) {
  const auto g = ta::testing::random_graph(4, 1);
  Hcc m(g);
  std::mt19937_64 rng(0);
  ta::ExtenderConfig cfg;
  cfg.k = 10;
  cfg.pool = 5;
  EXPECT_THROW(ta::sample_splits(SmallCluster::full(4), cfg, m, rng), ta::DomainError);
  EXPECT_THROW(ta::sample_splits(set_of({1}), ta::ExtenderConfig{}, m, rng), ta::DomainError);
}

TEST(IterativeSearch, OneRoundEqualsSingleSearch) {
  const auto jet = ta::testing::jet_with_leaves(14, 9, 400.0);
  Ginkgo m(jet);
  const auto gr = ta::greedy(m);
  ta::ExtenderConfig cfg;
  cfg.seed = 5;
  auto t1 = ta::init_from_trees<SmallCluster>({gr.tree}, 14);
  const auto rounds = ta::iterative_search(t1, m, 1, cfg);
  auto t2 = ta::init_from_trees<SmallCluster>({gr.tree}, 14);
  ta::SplitExtender<SmallCluster> ext(cfg);
  ext.begin(t2);
  const auto single = ta::astar_search(t2, m, &ext);
  ASSERT_EQ(rounds.size(), 1U);
  EXPECT_EQ(rounds[0].cost, single.cost);
  EXPECT_EQ(rounds[0].tree, single.tree);
}

TEST(IterativeSearch, CostsNeverIncrease) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto jet = ta::testing::jet_with_leaves(14, 100 + seed, 400.0);
    Ginkgo m(jet);
    const auto gr = ta::greedy(m);
    ta::ExtenderConfig cfg;
    cfg.seed = seed;
    cfg.pool = 50;
    cfg.k = 2;
    auto t = ta::init_from_trees<SmallCluster>({gr.tree}, 14);
    const auto rounds = ta::iterative_search(t, m, 4, cfg);
    EXPECT_LE(rounds[0].cost, gr.cost + 1e-9 * std::abs(gr.cost));
    for (std::size_t r = 1; r < rounds.size(); ++r) EXPECT_LE(rounds[r].cost, rounds[r - 1].cost) << "seed " << seed;
  }
}

TEST(IterativeSearch, FullPoolReachesOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto jet = ta::testing::small_jet(seed, 7);
    Ginkgo m(jet);
    auto t = ta::Trellis<SmallCluster>::sparse(jet.size());
    const auto rounds = ta::iterative_search(t, m, 1, all_splits_config());
    EXPECT_TRUE(ta::costs_close(rounds[0].cost, ta::brute_force_map(m).cost)) << "seed " << seed;
  }
}

TEST(IterativeSearch, ZeroNodeBudgetOnInitializedTrellisCompletes) {
  const auto jet = ta::testing::jet_with_leaves(16, 3, 400.0);
  Ginkgo m(jet);
  const auto gr = ta::greedy(m);
  ta::ExtenderConfig cfg;
  cfg.node_budget = 5;
  auto t = ta::init_from_trees<SmallCluster>({gr.tree}, 16);
  ta::SplitExtender<SmallCluster> ext(cfg);
  ext.begin(t);
  const auto r = ta::astar_search(t, m, &ext);
  EXPECT_TRUE(ta::costs_close(r.cost, ta::tree_cost(r.tree, m)));
  EXPECT_LE(r.cost, gr.cost + 1e-9 * std::abs(gr.cost));
  EXPECT_THROW(ta::iterative_search(t, m, 0, cfg), ta::DomainError);
}
