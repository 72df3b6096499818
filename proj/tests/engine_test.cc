#include "rotavg/engine.h"

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "rotavg/errors.h"
#include "test_util.h"

namespace rotavg {
namespace {

// Selected set holding exact GT in the frame where `selected[0]` is I.
IncrementalState StateFromGt(int n, const Registration& gt,
                             const std::vector<VertexId>& selected) {
  const Rotation s = gt.at(selected[0]).Inverse();
  SeedResult seed;
  seed.triplet = {selected[0], selected[1], selected[2]};
  for (int k = 0; k < 3; ++k) seed.rotations[k] = gt.at(selected[k]) * s;
  IncrementalState state(n, seed);
  for (size_t k = 3; k < selected.size(); ++k) {
    state.Admit(selected[k], gt.at(selected[k]) * s);
  }
  return state;
}

TEST(Chaining, ExactTripletPasses) {
  std::mt19937_64 rng(1);
  const auto gt = testing::RandomGroundTruth(3, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}}, gt);
  const auto res = ChainingCheck(g, {0, 1, 2}, 3.0);
  EXPECT_TRUE(res.passes);
  EXPECT_LT(res.deviation_deg, 1e-10);
}

TEST(Chaining, DeviationEqualsInjectedAngle) {
  std::mt19937_64 rng(2);
  const auto gt = testing::RandomGroundTruth(3, rng);
  for (double angle : {5.0, 2.9}) {
    EpipolarGraph g(3);
    g.AddEdge(0, 1, gt.at(1) * gt.at(0).Inverse());
    g.AddEdge(0, 2, gt.at(2) * gt.at(0).Inverse());
    g.AddEdge(1, 2, gt.at(2) * gt.at(1).Inverse() *
                        Rotation::FromAxisAngle(Eigen::Vector3d(1, 2, 3), DegToRad(angle)));
    const auto res = ChainingCheck(g, {0, 1, 2}, 3.0);
    EXPECT_NEAR(res.deviation_deg, angle, 1e-9);
    EXPECT_EQ(res.passes, angle < 3.0);
  }
}

TEST(Seed, SingleConsistentTriplet) {
  std::mt19937_64 rng(3);
  const auto gt = testing::RandomGroundTruth(4, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}, {2, 3}}, gt);
  const SeedResult seed = SelectSeed(g, EngineOptions());
  EXPECT_EQ(seed.triplet, (Triplet{0, 1, 2}));
  EXPECT_NEAR(seed.reward, 3.0, 1e-12);
  EXPECT_TRUE(seed.rotations[0] == Rotation());
  EXPECT_LT(AngularDistanceDeg(seed.rotations[1], g.Measurement(0, 1)), 1e-8);
}

TEST(Seed, ConsistentTripletBeatsDeviatingOne) {
  std::mt19937_64 rng(4);
  const auto gt = testing::RandomGroundTruth(5, rng);
  EpipolarGraph g(5);
  g.AddEdge(0, 1, gt.at(1) * gt.at(0).Inverse());
  g.AddEdge(0, 2, gt.at(2) * gt.at(0).Inverse());
  g.AddEdge(1, 2, Rotation::AboutY(2.0) * gt.at(2) * gt.at(1).Inverse());
  g.AddEdge(2, 3, gt.at(3) * gt.at(2).Inverse());
  g.AddEdge(2, 4, gt.at(4) * gt.at(2).Inverse());
  g.AddEdge(3, 4, gt.at(4) * gt.at(3).Inverse());
  const SeedResult seed = SelectSeed(g, EngineOptions());
  EXPECT_EQ(seed.triplet, (Triplet{2, 3, 4}));
  EXPECT_NEAR(seed.reward, 3.0, 1e-12);
  // The deviating cycle settles at 2/3 deg per edge: reward 3 cos(2/3 deg).
  const double other = 3.0 * std::cos(DegToRad(2.0 / 3.0));
  EXPECT_LT(other, seed.reward);
  EXPECT_GT(other, 2.999);
}

TEST(Seed, NoTripletPasses) {
  std::mt19937_64 rng(5);
  const auto gt = testing::RandomGroundTruth(3, rng);
  EpipolarGraph g(3);
  g.AddEdge(0, 1, gt.at(1) * gt.at(0).Inverse());
  g.AddEdge(0, 2, gt.at(2) * gt.at(0).Inverse());
  g.AddEdge(1, 2, Rotation::AboutZ(10.0) * gt.at(2) * gt.at(1).Inverse());
  EXPECT_THROW(SelectSeed(g, EngineOptions()), NoValidSeed);

  EpipolarGraph path(3);
  path.AddEdge(0, 1, Rotation());
  path.AddEdge(1, 2, Rotation());
  EXPECT_THROW(SelectSeed(path, EngineOptions()), NoValidSeed);
}

TEST(Rewards, AllConsistentEdges) {
  std::mt19937_64 rng(6);
  const auto gt = testing::RandomGroundTruth(4, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}}, gt);
  const auto state = StateFromGt(4, gt, {0, 1, 2});
  const std::vector<VertexId> cand = {3};
  const auto rewards = CandidateRewards(g, state, cand, 3.0);
  ASSERT_EQ(rewards.size(), 1u);
  EXPECT_NEAR(rewards[0].reward, 3.0, 1e-12);
  EXPECT_EQ(rewards[0].support_size, 3);
  EXPECT_EQ(rewards[0].num_edges, 3);
  EXPECT_EQ(rewards[0].m_star, 0);
  EXPECT_TRUE(rewards[0].init == g.Measurement(0, 3) * state.Estimate(0));
}

TEST(Rewards, OutlierEdgeSupportsOnlyItself) {
  std::mt19937_64 rng(7);
  const auto gt = testing::RandomGroundTruth(4, rng);
  EpipolarGraph g(4);
  for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}) {
    g.AddEdge(i, j, gt.at(j) * gt.at(i).Inverse());
  }
  g.AddEdge(0, 3, Rotation::AboutX(60.0) * gt.at(3) * gt.at(0).Inverse());
  const auto state = StateFromGt(4, gt, {0, 1, 2});

  // Hand evaluation: anchors 1 and 2 agree (d = 0), anchor 0 is 60 deg off.
  const Rotation pre0 = g.Measurement(0, 3) * state.Estimate(0);
  const Rotation pre1 = g.Measurement(1, 3) * state.Estimate(1);
  EXPECT_NEAR(AngularDistanceDeg(pre0, pre1), 60.0, 1e-9);

  const std::vector<VertexId> cand = {3};
  const auto rewards = CandidateRewards(g, state, cand, 3.0);
  ASSERT_EQ(rewards.size(), 1u);
  EXPECT_EQ(rewards[0].m_star, 1);
  EXPECT_EQ(rewards[0].support_size, 2);
  EXPECT_NEAR(rewards[0].reward, 2.0, 1e-12);
  EXPECT_EQ(rewards[0].num_edges, 3);
}

TEST(Rewards, SingleEdgeSelfSupport) {
  std::mt19937_64 rng(8);
  const auto gt = testing::RandomGroundTruth(4, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}, {2, 3}}, gt);
  const auto state = StateFromGt(4, gt, {0, 1, 2});
  const std::vector<VertexId> cand = {3, 1};
  std::vector<VertexId> skipped;
  const auto rewards = CandidateRewards(g, state, cand, 3.0, &skipped);
  ASSERT_EQ(rewards.size(), 2u);
  // Candidate 1 is already selected, so it has edges; output is id-ordered.
  EXPECT_EQ(rewards[1].p, 3);
  EXPECT_DOUBLE_EQ(rewards[1].reward, 1.0);
  EXPECT_EQ(rewards[1].support_size, 1);
  EXPECT_TRUE(rewards[1].self_support_only());
  EXPECT_TRUE(skipped.empty());
}

TEST(Rewards, CandidateWithoutEdgeIsSkipped) {
  std::mt19937_64 rng(9);
  const auto gt = testing::RandomGroundTruth(5, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}}, gt);
  const auto state = StateFromGt(5, gt, {0, 1, 2});
  const std::vector<VertexId> cand = {3, 4};
  std::vector<VertexId> skipped;
  const auto rewards = CandidateRewards(g, state, cand, 3.0, &skipped);
  ASSERT_EQ(rewards.size(), 1u);
  EXPECT_EQ(skipped, (std::vector<VertexId>{4}));
}

TEST(Nbv, SelectionRules) {
  CandidateReward a, b;
  a.p = 2;
  a.reward = 3.0;
  b.p = 1;
  b.reward = 2.1;
  EXPECT_EQ(SelectNbv(std::vector<CandidateReward>{a}).p, 2);
  EXPECT_EQ(SelectNbv(std::vector<CandidateReward>{b, a}).p, 2);
  CandidateReward c, d;
  c.p = 7;
  c.reward = 2.0;
  d.p = 4;
  d.reward = 2.0;
  EXPECT_EQ(SelectNbv(std::vector<CandidateReward>{c, d}).p, 4);
  EXPECT_THROW(SelectNbv(std::vector<CandidateReward>{}), EmptyFrontier);
}

TEST(LocalOpt, ExactEdgesKeepInit) {
  std::mt19937_64 rng(10);
  const auto gt = testing::RandomGroundTruth(4, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}}, gt);
  const auto state = StateFromGt(4, gt, {0, 1, 2});
  const Rotation init = g.Measurement(0, 3) * state.Estimate(0);
  const auto res = LocalOptimize(g, state, 3, init, EngineOptions());
  EXPECT_LT(AngularDistanceDeg(res.rotation, init), 1e-8);
  EXPECT_EQ(res.num_inliers, 3);
}

TEST(LocalOpt, PerturbedInitReturnsToExactValue) {
  std::mt19937_64 rng(11);
  const auto gt = testing::RandomGroundTruth(4, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}}, gt);
  const auto state = StateFromGt(4, gt, {0, 1, 2});
  const Rotation exact = gt.at(3) * gt.at(0).Inverse();
  const Rotation init = exact * Rotation::FromAxisAngle(Eigen::Vector3d(1, 1, 0), DegToRad(1.0));
  const auto res = LocalOptimize(g, state, 3, init, EngineOptions());
  EXPECT_EQ(res.num_inliers, 2);
  EXPECT_LT(AngularDistanceDeg(res.rotation, exact), 1e-6);
}

TEST(LocalOpt, SingleInlierEqualsChainedValue) {
  std::mt19937_64 rng(12);
  const auto gt = testing::RandomGroundTruth(4, rng);
  EpipolarGraph g(4);
  for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}, {2, 3}}) {
    g.AddEdge(i, j, gt.at(j) * gt.at(i).Inverse());
  }
  g.AddEdge(0, 3, Rotation::AboutZ(40.0) * gt.at(3) * gt.at(0).Inverse());
  const auto state = StateFromGt(4, gt, {0, 1, 2});
  const Rotation chained = g.Measurement(2, 3) * state.Estimate(2);
  const auto res = LocalOptimize(g, state, 3, chained, EngineOptions());
  EXPECT_EQ(res.num_inliers, 1);
  EXPECT_LT(AngularDistanceDeg(res.rotation, chained), 1e-8);
}

TEST(GlobalOpt, ConsistentSubgraphUnchanged) {
  std::mt19937_64 rng(13);
  const auto gt = testing::RandomGroundTruth(8, rng);
  const auto g = testing::ConsistentGraph(testing::ConnectedRandomEdges(8, 0.6, rng), gt);
  auto state = StateFromGt(8, gt, {0, 1, 2, 3, 4, 5, 6, 7});
  const Registration before = state.Estimates();
  const auto res = GlobalOptimize(g, state, EngineOptions());
  EXPECT_LT(res.report.final_cost, 1e-16);
  EXPECT_EQ(static_cast<int>(res.inlier_edges.size()), g.NumEdges());
  for (const auto& [v, r] : before) {
    EXPECT_LT(AngularDistanceDeg(r, state.Estimate(v)), 1e-8);
  }
}

TEST(GlobalOpt, OutlierEdgeExcluded) {
  std::mt19937_64 rng(14);
  const auto gt = testing::RandomGroundTruth(8, rng);
  auto edges = testing::ConnectedRandomEdges(8, 0.6, rng);
  EpipolarGraph g(8);
  int outlier = -1;
  for (const auto& [i, j] : edges) {
    Rotation m = gt.at(j) * gt.at(i).Inverse();
    if (outlier < 0 && i != 0 && j != 0) {
      m = Rotation::AboutX(90.0) * m;
      outlier = g.AddEdge(i, j, m);
    } else {
      g.AddEdge(i, j, m);
    }
  }
  ASSERT_GE(outlier, 0);
  // Noisy estimates so the optimization has work to do.
  auto state = StateFromGt(8, gt, {0, 1, 2, 3, 4, 5, 6, 7});
  for (VertexId v = 1; v < 8; ++v) {
    state.SetEstimate(v, state.Estimate(v) * SamplePerturbation(rng, 0.5));
  }
  const auto res = GlobalOptimize(g, state, EngineOptions());
  EXPECT_EQ(std::count(res.inlier_edges.begin(), res.inlier_edges.end(), outlier), 0);
  EXPECT_EQ(static_cast<int>(res.inlier_edges.size()), g.NumEdges() - 1);
  EXPECT_LT(testing::MaxErrorUpToGauge(state.Estimates(), gt), 1e-6);
}

TEST(Cadence, WatermarkSchedule) {
  std::mt19937_64 rng(15);
  const auto gt = testing::RandomGroundTruth(20, rng);
  const auto g = testing::ConsistentGraph(testing::ConnectedRandomEdges(20, 0.3, rng), gt);
  EngineOptions options;
  options.global_rate = 0.05;
  const auto result = RunToExhaustion(g, options);
  ASSERT_EQ(result.trace.size(), 17u);
  // Integer form of size >= last * 1.05.
  int last = 3;
  for (const auto& rec : result.trace) {
    const bool due = rec.size_after * 100 >= last * 105;
    EXPECT_EQ(rec.global_opt, due) << "size " << rec.size_after;
    if (due) last = rec.size_after;
  }
  options.global_rate = 0.5;
  const auto sparse = RunToExhaustion(g, options);
  std::vector<int> sizes;
  for (const auto& rec : sparse.trace) {
    if (rec.global_opt) sizes.push_back(rec.size_after);
  }
  EXPECT_EQ(sizes, (std::vector<int>{5, 8, 12, 18}));
}

TEST(Run, ExhaustionRecoversConsistentGraph) {
  std::mt19937_64 rng(16);
  const auto gt = testing::RandomGroundTruth(30, rng);
  const auto g = testing::ConsistentGraph(testing::ConnectedRandomEdges(30, 0.25, rng), gt);
  const auto result = RunToExhaustion(g, EngineOptions());
  EXPECT_EQ(result.rotations.size(), 30u);
  EXPECT_EQ(static_cast<int>(result.inlier_edges.size()), g.NumEdges());
  EXPECT_LT(result.final_report.final_cost, 1e-16);
  EXPECT_LT(testing::MaxErrorUpToGauge(result.rotations, gt), 1e-6);
  EXPECT_TRUE(result.rotations.at(result.gauge_vertex) == Rotation());
}

TEST(Run, SelectedSetStaysConnectedAndRewardsBounded) {
  std::mt19937_64 rng(17);
  const int n = 40;
  const auto gt = testing::RandomGroundTruth(n, rng);
  EpipolarGraph g(n);
  for (const auto& [i, j] : testing::ConnectedRandomEdges(n, 0.2, rng)) {
    Rotation m = SamplePerturbation(rng, 1.0) * gt.at(j) * gt.at(i).Inverse();
    if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.1) m = SampleUniform(rng);
    g.AddEdge(i, j, m);
  }
  const auto result = RunToExhaustion(g, EngineOptions());
  std::set<VertexId> seen(result.selection_order.begin(), result.selection_order.begin() + 3);
  for (size_t k = 3; k < result.selection_order.size(); ++k) {
    const VertexId v = result.selection_order[k];
    bool linked = false;
    for (const Neighbor& nb : g.Neighbors(v)) linked |= seen.contains(nb.vertex);
    EXPECT_TRUE(linked);
    seen.insert(v);
  }
  for (const auto& rec : result.trace) {
    int edges_in = 0;
    for (const Neighbor& nb : g.Neighbors(rec.chosen_vertex)) {
      const auto pos = std::find(result.selection_order.begin(),
                                 result.selection_order.end(), nb.vertex);
      if (pos - result.selection_order.begin() < rec.size_after - 1) ++edges_in;
    }
    EXPECT_LE(rec.reward, edges_in + 1e-12);
    EXPECT_GE(rec.support_size, 1);
  }
}

TEST(Run, Deterministic) {
  std::mt19937_64 rng(18);
  const int n = 25;
  const auto gt = testing::RandomGroundTruth(n, rng);
  EpipolarGraph g(n);
  for (const auto& [i, j] : testing::ConnectedRandomEdges(n, 0.3, rng)) {
    g.AddEdge(i, j, SamplePerturbation(rng, 2.0) * gt.at(j) * gt.at(i).Inverse());
  }
  const auto a = RunToExhaustion(g, EngineOptions());
  const auto b = RunToExhaustion(g, EngineOptions());
  EXPECT_EQ(a.selection_order, b.selection_order);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace[k].reward, b.trace[k].reward);
    EXPECT_EQ(a.trace[k].cost_after, b.trace[k].cost_after);
  }
  for (const auto& [v, r] : a.rotations) EXPECT_TRUE(r == b.rotations.at(v));
}

TEST(Run, DominationTerminationOnStarWithTriangle) {
  // Hub 0 joined to 1..5 plus the chord 1-2: the seed {0, 1, 2} already
  // dominates, so no NBV step runs.
  std::mt19937_64 rng(19);
  const auto gt = testing::RandomGroundTruth(6, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}}, gt);
  const auto result = RunIncremental(g, EngineOptions(), nullptr,
                                     [&](const IncrementalState& s) {
                                       for (VertexId v = 0; v < 6; ++v) {
                                         bool dom = s.IsSelected(v);
                                         for (const Neighbor& nb : g.Neighbors(v))
                                           dom |= s.IsSelected(nb.vertex);
                                         if (!dom) return false;
                                       }
                                       return true;
                                     });
  EXPECT_TRUE(result.trace.empty());
  EXPECT_EQ(result.selection_order, (std::vector<VertexId>{0, 1, 2}));
}

TEST(Run, DisconnectedGraphStalls) {
  std::mt19937_64 rng(20);
  const auto gt = testing::RandomGroundTruth(6, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}, {3, 4}, {4, 5}}, gt);
  EXPECT_THROW(RunToExhaustion(g, EngineOptions()), Stalled);
}

}  // namespace
}  // namespace rotavg
