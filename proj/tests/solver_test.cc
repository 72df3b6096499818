#include "rotavg/solver.h"

#include <functional>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "rotavg/errors.h"
#include "test_util.h"

namespace rotavg {
namespace {

ManifoldProblem ProblemFromGraph(const EpipolarGraph& g, const Registration& init) {
  ManifoldProblem p;
  p.values = init;
  for (const auto& m : g.Edges()) {
    p.terms.push_back({m.i, m.j, m.rot});
  }
  return p;
}

// Random connected problem with noisy measurements and perturbed initial
// values.
ManifoldProblem RandomProblem(int n, std::mt19937_64& rng, double noise_deg,
                              double init_deg) {
  const Registration gt = testing::RandomGroundTruth(n, rng);
  EpipolarGraph g(n);
  for (const auto& [i, j] : testing::ConnectedRandomEdges(n, 0.4, rng)) {
    g.AddEdge(i, j, SamplePerturbation(rng, noise_deg) * gt.at(j) * gt.at(i).Inverse());
  }
  Registration init;
  for (const auto& [v, r] : gt) {
    init[v] = r * SamplePerturbation(rng, init_deg);
  }
  ManifoldProblem p = ProblemFromGraph(g, init);
  p.fixed = {0};
  return p;
}

TEST(Solver, SingleConstraintExactFit) {
  ManifoldProblem p;
  p.values = {{0, Rotation()}, {1, Rotation()}};
  p.fixed = {0};
  p.terms = {{0, 1, Rotation::AboutZ(17.0)}};
  const auto result = Solve(p);
  EXPECT_LT(AngularDistanceDeg(result.solution.at(1), Rotation::AboutZ(17.0)), 1e-8);
  EXPECT_LT(result.report.final_cost, 1e-16);
  EXPECT_TRUE(result.report.converged);
  EXPECT_TRUE(result.solution.at(0) == Rotation());
}

TEST(Solver, ConsistentTriangleIsRecovered) {
  std::mt19937_64 rng(4);
  const Registration gt = testing::RandomGroundTruth(3, rng);
  const auto g = testing::ConsistentGraph({{0, 1}, {0, 2}, {1, 2}}, gt);
  Registration init = {{0, gt.at(0)}, {1, gt.at(0)}, {2, gt.at(0)}};
  ManifoldProblem p = ProblemFromGraph(g, init);
  p.fixed = {0};
  const auto result = Solve(p);
  EXPECT_LT(result.report.final_cost, 1e-16);
  EXPECT_LT(testing::MaxErrorUpToGauge(result.solution, gt), 1e-8);
  EXPECT_TRUE(result.solution.at(0) == gt.at(0));
}

// Derivative-free coordinate search over the tangent coordinates of the
// free rotations, run to a tight step size.
double CoordinateSearchMinimum(const ManifoldProblem& p) {
  std::vector<VertexId> free;
  for (const auto& [v, r] : p.values) {
    if (!p.fixed.contains(v)) free.push_back(v);
  }
  Registration x = p.values;
  double cost = EvaluateCost(p, x);
  for (double step = 0.05; step > 1e-11;) {
    bool improved = false;
    for (VertexId v : free) {
      for (int k = 0; k < 3; ++k) {
        for (double sign : {1.0, -1.0}) {
          Registration trial = x;
          trial[v] = x.at(v) * ExpMap(sign * step * Eigen::Vector3d::Unit(k));
          const double c = EvaluateCost(p, trial);
          if (c < cost) {
            cost = c;
            x = std::move(trial);
            improved = true;
          }
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return cost;
}

TEST(Solver, PerturbedTriangleMatchesCoordinateSearch) {
  std::mt19937_64 rng(8);
  const Registration gt = testing::RandomGroundTruth(3, rng);
  EpipolarGraph g(3);
  g.AddEdge(0, 1, gt.at(1) * gt.at(0).Inverse());
  g.AddEdge(0, 2, gt.at(2) * gt.at(0).Inverse());
  g.AddEdge(1, 2, Rotation::AboutX(3.0) * gt.at(2) * gt.at(1).Inverse());
  ManifoldProblem p = ProblemFromGraph(g, gt);
  p.fixed = {0};
  const auto result = Solve(p);
  EXPECT_LT(result.report.final_cost, result.report.initial_cost);
  const double oracle = CoordinateSearchMinimum(p);
  EXPECT_NEAR(result.report.final_cost, oracle, 1e-6);
  EXPECT_LE(result.report.final_cost, oracle + 1e-12);
  // A single 3-cycle spreads its discrepancy evenly: cost = theta^2 / 3.
  EXPECT_NEAR(result.report.final_cost, std::pow(DegToRad(3.0), 2) / 3.0, 1e-9);
}

TEST(Solver, FixedVariablesAreBitIdentical) {
  std::mt19937_64 rng(15);
  ManifoldProblem p = RandomProblem(10, rng, 2.0, 5.0);
  p.fixed = {0, 3, 7};
  const auto result = Solve(p);
  for (VertexId v : p.fixed) {
    EXPECT_TRUE(result.solution.at(v) == p.values.at(v));
  }
  EXPECT_LE(result.report.final_cost, result.report.initial_cost);
}

TEST(Solver, EmptyFixedSetHoldsLowestIndex) {
  std::mt19937_64 rng(16);
  ManifoldProblem p = RandomProblem(6, rng, 1.0, 5.0);
  p.fixed.clear();
  const auto result = Solve(p);
  EXPECT_TRUE(result.solution.at(0) == p.values.at(0));
}

TEST(Solver, AcceptedCostsAreMonotone) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    ManifoldProblem p = RandomProblem(12, rng, 3.0, 20.0);
    const auto result = Solve(p);
    const auto& costs = result.report.accepted_costs;
    for (size_t k = 1; k < costs.size(); ++k) {
      // Steps inside the rounding band may tie up to a few ulps.
      EXPECT_LE(costs[k], costs[k - 1] * (1.0 + 64 * std::numeric_limits<double>::epsilon()));
    }
    EXPECT_EQ(costs.back(), result.report.final_cost);
  }
}

TEST(Solver, GaugeInvariance) {
  std::mt19937_64 rng(31);
  ManifoldProblem p = RandomProblem(10, rng, 2.0, 10.0);
  const Rotation s = SampleUniform(rng);
  const auto base = Solve(p);

  // Right multiplication leaves every R_j R_i^T unchanged.
  ManifoldProblem right = p;
  for (auto& [v, r] : right.values) r = r * s;
  const auto right_sol = Solve(right);
  for (const auto& [v, r] : base.solution) {
    EXPECT_LT(AngularDistanceDeg(r * s, right_sol.solution.at(v)), 1e-8);
  }

  // Left multiplication with conjugated measurements.
  ManifoldProblem left = p;
  for (auto& [v, r] : left.values) r = s * r;
  for (auto& t : left.terms) t.meas = s * t.meas * s.Inverse();
  const auto left_sol = Solve(left);
  for (const auto& [v, r] : base.solution) {
    EXPECT_LT(AngularDistanceDeg(s * r, left_sol.solution.at(v)), 1e-8);
  }
}

TEST(Solver, Deterministic) {
  std::mt19937_64 rng(37);
  ManifoldProblem p = RandomProblem(15, rng, 2.0, 10.0);
  const auto a = Solve(p);
  const auto b = Solve(p);
  EXPECT_EQ(a.report.final_cost, b.report.final_cost);
  EXPECT_EQ(a.report.iterations, b.report.iterations);
  EXPECT_EQ(a.report.accepted_costs, b.report.accepted_costs);
  for (const auto& [v, r] : a.solution) {
    EXPECT_TRUE(r == b.solution.at(v));
  }
}

TEST(Solver, SparsePathMatchesDense) {
  std::mt19937_64 rng(41);
  ManifoldProblem p = RandomProblem(20, rng, 2.0, 10.0);
  const auto dense = Solve(p);
  p.options.dense_limit = 0;
  const auto sparse = Solve(p);
  EXPECT_NEAR(dense.report.final_cost, sparse.report.final_cost, 1e-12);
  for (const auto& [v, r] : dense.solution) {
    EXPECT_LT(AngularDistanceDeg(r, sparse.solution.at(v)), 1e-6);
  }
}

TEST(Solver, IterationBudgetReportsNonConvergence) {
  std::mt19937_64 rng(43);
  ManifoldProblem p = RandomProblem(10, rng, 2.0, 40.0);
  p.options.max_iterations = 1;
  const auto result = Solve(p);
  EXPECT_FALSE(result.report.converged);
  EXPECT_EQ(result.report.termination, "max_iterations");
  EXPECT_LT(result.report.final_cost, result.report.initial_cost);
}

TEST(Solver, CutLocusInitialValueIsJittered) {
  ManifoldProblem p;
  p.values = {{0, Rotation()}, {1, Rotation()}};
  p.fixed = {0};
  p.terms = {{0, 1, Rotation::AboutX(180.0)}};
  SolverResult result;
  ASSERT_NO_THROW(result = Solve(p));
  EXPECT_LT(result.report.final_cost, 1e-12);
  EXPECT_LT(AngularDistanceDeg(result.solution.at(1), Rotation::AboutX(180.0)), 1e-6);
}

TEST(Solver, CutLocusBetweenFixedRotationsPropagates) {
  ManifoldProblem p;
  p.values = {{0, Rotation()}, {1, Rotation()}, {2, Rotation()}};
  p.fixed = {0, 1};
  p.terms = {{0, 1, Rotation::AboutX(180.0)}, {0, 2, Rotation::AboutZ(10.0)}};
  EXPECT_THROW(Solve(p), NearPiAmbiguity);
}

TEST(Solver, MissingValueIsRejected) {
  ManifoldProblem p;
  p.values = {{0, Rotation()}};
  p.terms = {{0, 1, Rotation()}};
  EXPECT_THROW(Solve(p), std::invalid_argument);
}

TEST(GradientCheck, ZeroResidualProblem) {
  std::mt19937_64 rng(51);
  const Registration gt = testing::RandomGroundTruth(6, rng);
  const auto g = testing::ConsistentGraph(testing::ConnectedRandomEdges(6, 0.6, rng), gt);
  ManifoldProblem p = ProblemFromGraph(g, gt);
  p.fixed = {0};
  EXPECT_LT(NumericGradientCheck(p, 1e-6), 1e-6);
}

TEST(GradientCheck, RandomTenVertexProblems) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    ManifoldProblem p = RandomProblem(10, rng, 10.0, 30.0);
    EXPECT_LT(NumericGradientCheck(p, 1e-6), 1e-4);
  }
}

TEST(GradientCheck, SingleTerm) {
  std::mt19937_64 rng(57);
  ManifoldProblem p;
  p.values = {{0, SampleUniform(rng)}, {1, SampleUniform(rng)}};
  p.fixed = {0};
  p.terms = {{0, 1, SampleUniform(rng)}};
  if (AngularDistanceDeg(p.terms[0].meas,
                         p.values.at(1) * p.values.at(0).Inverse()) > 170.0) {
    GTEST_SKIP() << "sample landed near the cut locus";
  }
  EXPECT_LT(NumericGradientCheck(p, 1e-6), 1e-5);
  EXPECT_THROW(NumericGradientCheck(p, 1e-2), std::invalid_argument);
}

}  // namespace
}  // namespace rotavg
