#include "rotavg/cds.h"

#include <random>

#include <gtest/gtest.h>

#include "rotavg/errors.h"
#include "test_util.h"

namespace rotavg {
namespace {

EpipolarGraph Topology(int n, const std::vector<std::pair<int, int>>& edges) {
  EpipolarGraph g(n);
  for (const auto& [i, j] : edges) g.AddEdge(i, j, Rotation());
  return g;
}

EpipolarGraph Star(int leaves) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v <= leaves; ++v) edges.push_back({0, v});
  return Topology(leaves + 1, edges);
}

EpipolarGraph Path(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});
  return Topology(n, edges);
}

// Four-clique {0,1,2,3} with a pendant 6 on 0 and a tail 3-4-5.
const std::vector<std::pair<int, int>> kToyEdges = {
    {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {0, 6}, {3, 4}, {4, 5}};

using Set = std::vector<VertexId>;

TEST(IsConnectedDominating, SmallCases) {
  EXPECT_TRUE(IsConnectedDominating(Star(5), Set{0}));
  EXPECT_FALSE(IsConnectedDominating(Star(5), Set{1}));
  EXPECT_FALSE(IsConnectedDominating(Path(5), Set{1, 3}));
  EXPECT_TRUE(IsConnectedDominating(Path(5), Set{1, 2, 3}));
  EXPECT_FALSE(IsConnectedDominating(Path(5), Set{}));
}

TEST(TraditionalCds, StarAndPath) {
  const auto star = TraditionalCds(Star(5));
  EXPECT_EQ(star.members, Set{0});
  EXPECT_TRUE(star.rotations.empty());
  const auto path = TraditionalCds(Path(5));
  EXPECT_EQ(path.members, (Set{1, 2, 3}));
  EXPECT_EQ(path.members, BruteForceMinCds(Path(5)));
  EXPECT_TRUE(path.connected && path.dominating);
}

TEST(TraditionalCds, ToyGraphSmallerThanTaskSpecific) {
  std::mt19937_64 rng(1);
  const auto gt = testing::RandomGroundTruth(7, rng);
  const auto g = testing::ConsistentGraph(kToyEdges, gt);
  const auto traditional = TraditionalCds(g);
  EXPECT_EQ(traditional.members, (Set{0, 3, 4}));
  const auto task = TaskSpecificCds(g, EngineOptions());
  EXPECT_EQ(task.members, (Set{0, 1, 2, 3, 4}));
  EXPECT_EQ(task.n_ref, 5);
  ASSERT_EQ(task.trace.size(), 2u);
  EXPECT_EQ(task.trace[0].chosen_vertex, 3);
  EXPECT_EQ(task.trace[1].chosen_vertex, 4);
}

TEST(TraditionalCds, WeightedModeFollowsWeights) {
  // On P5 with a heavy edge 3-4, vertex 3 wins the initial pick.
  const auto g = Path(5);
  TraditionalCdsOptions options;
  options.edge_weights = {1.0, 1.0, 1.0, 5.0};
  const auto cds = TraditionalCds(g, options);
  EXPECT_TRUE(IsConnectedDominating(g, cds.members));
  EXPECT_EQ(cds.members, (Set{1, 2, 3}));
  options.edge_weights = {1.0};
  EXPECT_THROW(TraditionalCds(g, options), ConfigError);
}

TEST(TraditionalCds, RandomTieBreakStaysValid) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto edges = testing::ConnectedRandomEdges(20, 0.2, rng);
    const auto g = Topology(20, edges);
    TraditionalCdsOptions options;
    options.tie_break_seed = trial;
    EXPECT_TRUE(IsConnectedDominating(g, TraditionalCds(g, options).members));
  }
}

TEST(TaskSpecificCds, StarHasNoSeed) {
  EXPECT_THROW(TaskSpecificCds(Star(5), EngineOptions()), NoValidSeed);
}

TEST(TaskSpecificCds, WheelRecoversGroundTruth) {
  std::mt19937_64 rng(3);
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v <= 6; ++v) {
    edges.push_back({0, v});
    edges.push_back({v, v % 6 + 1});
  }
  const auto gt = testing::RandomGroundTruth(7, rng);
  const auto g = testing::ConsistentGraph(edges, gt);
  const auto ref = TaskSpecificCds(g, EngineOptions());
  EXPECT_TRUE(ref.connected);
  EXPECT_TRUE(ref.dominating);
  EXPECT_TRUE(IsConnectedDominating(g, ref.members));
  EXPECT_EQ(ref.rotations.size(), ref.members.size());
  EXPECT_LT(testing::MaxErrorUpToGauge(ref.rotations, gt), 1e-6);
  EXPECT_TRUE(ref.rotations.at(ref.gauge_vertex) == Rotation());
}

TEST(TaskSpecificCds, NeverSmallerThanTraditional) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 10 + trial;
    const auto gt = testing::RandomGroundTruth(n, rng);
    const auto g = testing::ConsistentGraph(testing::ConnectedRandomEdges(n, 0.3, rng), gt);
    ReferenceSet task;
    try {
      task = TaskSpecificCds(g, EngineOptions());
    } catch (const NoValidSeed&) {
      continue;
    }
    const auto traditional = TraditionalCds(g);
    EXPECT_TRUE(IsConnectedDominating(g, task.members));
    EXPECT_GE(task.n_ref, traditional.n_ref) << "n = " << n;
  }
}

TEST(RandomizedUnion, ContainsEveryExtraction) {
  std::mt19937_64 rng(5);
  const auto gt = testing::RandomGroundTruth(30, rng);
  const auto g = testing::ConsistentGraph(testing::ConnectedRandomEdges(30, 0.3, rng), gt);
  const auto ref = RandomizedUnionReference(g, EngineOptions(), 5, 11);
  EXPECT_TRUE(ref.connected && ref.dominating);
  for (int k = 0; k < 5; ++k) {
    TraditionalCdsOptions options;
    options.tie_break_seed = 11 + k;
    for (VertexId v : TraditionalCds(g, options).members) {
      EXPECT_TRUE(std::binary_search(ref.members.begin(), ref.members.end(), v));
    }
  }
  EXPECT_EQ(ref.rotations.size(), ref.members.size());
  EXPECT_LT(testing::MaxErrorUpToGauge(ref.rotations, gt), 1e-6);
}

TEST(BruteForceMinCds, SmallGraphs) {
  EXPECT_EQ(BruteForceMinCds(Topology(3, {{0, 1}, {0, 2}, {1, 2}})), Set{0});
  EXPECT_EQ(BruteForceMinCds(Path(5)), (Set{1, 2, 3}));
  EXPECT_EQ(BruteForceMinCds(Topology(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}})), (Set{0, 1}));
  EXPECT_THROW(BruteForceMinCds(Path(17)), TooLarge);
}

TEST(BruteForceMinCds, TraditionalIsNeverSmaller) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + trial % 8;
    const auto g = Topology(n, testing::ConnectedRandomEdges(n, 0.35, rng));
    const auto best = BruteForceMinCds(g);
    EXPECT_TRUE(IsConnectedDominating(g, best));
    EXPECT_GE(TraditionalCds(g).n_ref, static_cast<int>(best.size()));
  }
}

}  // namespace
}  // namespace rotavg
