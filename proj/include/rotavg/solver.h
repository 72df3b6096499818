#pragma once

#include <set>
#include <string>
#include <vector>

#include "rotavg/graph.h"
#include "rotavg/so3.h"

namespace rotavg {

struct SolverOptions {
  int max_iterations = 100;
  // Convergence when the largest per-rotation norm of J^T r falls below this.
  double gradient_tol = 1e-12;
  // Convergence when the largest per-rotation step falls below this (radians).
  double step_tol = 1e-12;
  // Convergence when an accepted step lowers the cost by less than this
  // fraction of the current cost. Zero disables the test.
  double function_tol = 0.0;
  double initial_lambda = 1e-4;
  // Free rotations above this count use the sparse factorization.
  int dense_limit = 600;
};

// One summand d_R^2(meas, R_j R_i^T).
struct ResidualTerm {
  VertexId i = 0;
  VertexId j = 0;
  Rotation meas;
};

// Least squares over a product of SO(3) factors. `values` holds the initial
// value of every rotation referenced by a term, both free and fixed. If
// `fixed` is empty the lowest-index rotation is held fixed.
struct ManifoldProblem {
  Registration values;
  std::set<VertexId> fixed;
  std::vector<ResidualTerm> terms;
  SolverOptions options;
};

struct SolverReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  // Cost after every accepted step, starting with the initial cost.
  // Non-increasing up to a relative 64 eps: steps whose cost change is
  // within rounding are accepted when they shrink the gradient.
  std::vector<double> accepted_costs;
  std::string termination;
};

struct SolverResult {
  Registration solution;
  SolverReport report;
};

// Levenberg-Marquardt with right-multiplicative updates R <- R exp(delta).
// Returns the best iterate; `report.converged` is false when the iteration
// budget ran out (the DidNotConverge condition). Throws NearPiAmbiguity if
// the initial residuals stay at the log-map cut locus after three jittered
// retries.
SolverResult Solve(const ManifoldProblem& problem);

// Sum over terms of d_R^2 (radians) at `values`.
double EvaluateCost(const ManifoldProblem& problem, const Registration& values);

// Residual vector log(meas * R_i * R_j^T); its norm equals d_R.
Eigen::Vector3d TermResidual(const Rotation& meas, const Rotation& ri,
                             const Rotation& rj);

// Max over free coordinates of |analytic - central difference| /
// (1 + |analytic|) for the gradient of the cost at the initial values.
// h must lie in [1e-8, 1e-3].
double NumericGradientCheck(const ManifoldProblem& problem, double h);

}  // namespace rotavg
