#include "rotavg/solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <glog/logging.h>

#include "rotavg/errors.h"

namespace rotavg {
namespace {

constexpr int kJitterRetries = 3;
constexpr double kJitterMagnitude = 1e-4;
constexpr double kMaxLambda = 1e32;
// Relative cost difference treated as a tie.
constexpr double kRoundingBand = 64 * std::numeric_limits<double>::epsilon();
constexpr double kMinDiagonal = 1e-6;

// Dense slot layout of the rotations a problem touches.
struct Layout {
  std::vector<VertexId> ids;
  std::vector<int> free_index;  // per slot, -1 when held fixed
  int num_free = 0;
  std::vector<std::pair<int, int>> term_slots;
};

Layout MakeLayout(const ManifoldProblem& p) {
  Layout layout;
  std::set<VertexId> referenced;
  for (const auto& t : p.terms) {
    for (VertexId v : {t.i, t.j}) {
      if (!p.values.contains(v)) {
        throw std::invalid_argument("residual endpoint " + std::to_string(v) +
                                    " has no value");
      }
      referenced.insert(v);
    }
  }
  layout.ids.assign(referenced.begin(), referenced.end());
  std::set<VertexId> fixed = p.fixed;
  if (fixed.empty() && !layout.ids.empty()) {
    fixed.insert(layout.ids.front());
  }
  auto slot_of = [&](VertexId v) {
    return static_cast<int>(
        std::lower_bound(layout.ids.begin(), layout.ids.end(), v) -
        layout.ids.begin());
  };
  layout.term_slots.reserve(p.terms.size());
  for (const auto& t : p.terms) {
    layout.term_slots.emplace_back(slot_of(t.i), slot_of(t.j));
  }
  layout.free_index.assign(layout.ids.size(), -1);
  for (size_t s = 0; s < layout.ids.size(); ++s) {
    if (!fixed.contains(layout.ids[s])) {
      layout.free_index[s] = layout.num_free++;
    }
  }
  return layout;
}

double Cost(const ManifoldProblem& p, const Layout& layout,
            const std::vector<Rotation>& x) {
  double cost = 0.0;
  for (size_t t = 0; t < p.terms.size(); ++t) {
    const auto [a, b] = layout.term_slots[t];
    const double d = AngularDistanceRad(p.terms[t].meas, x[b] * x[a].Inverse());
    cost += d * d;
  }
  return cost;
}

std::vector<Eigen::Vector3d> Residuals(const ManifoldProblem& p,
                                       const Layout& layout,
                                       const std::vector<Rotation>& x) {
  std::vector<Eigen::Vector3d> r(p.terms.size());
  for (size_t t = 0; t < p.terms.size(); ++t) {
    const auto [a, b] = layout.term_slots[t];
    r[t] = TermResidual(p.terms[t].meas, x[a], x[b]);
  }
  return r;
}

// Normal equations J^T J and J^T r in the free tangent coordinates. For a
// term with residual r = log(M R_i R_j^T), perturbing R_i by exp(d_i) and
// R_j by exp(d_j) gives dr = Jr^{-1}(r) R_j (d_i - d_j).
struct NormalEquations {
  Eigen::MatrixXd dense;
  std::vector<Eigen::Triplet<double>> sparse;
  Eigen::VectorXd gradient;
  // Isotropic per-rotation damping (block trace / 3), so the step commutes
  // with a change of gauge.
  Eigen::VectorXd diagonal;
};

double MaxBlockNorm(const Eigen::VectorXd& v) {
  double m = 0.0;
  for (Eigen::Index k = 0; k + 2 < v.size(); k += 3) m = std::max(m, v.segment<3>(k).norm());
  return m;
}

NormalEquations BuildNormalEquations(const ManifoldProblem& p,
                                     const Layout& layout,
                                     const std::vector<Rotation>& x,
                                     const std::vector<Eigen::Vector3d>& r,
                                     bool dense) {
  const int n = 3 * layout.num_free;
  NormalEquations ne;
  ne.gradient = Eigen::VectorXd::Zero(n);
  ne.diagonal = Eigen::VectorXd::Zero(n);
  if (dense) {
    ne.dense = Eigen::MatrixXd::Zero(n, n);
  }
  auto add_block = [&](int row, int col, const Eigen::Matrix3d& m) {
    if (dense) {
      ne.dense.block<3, 3>(3 * row, 3 * col) += m;
    } else {
      for (int u = 0; u < 3; ++u) {
        for (int v = 0; v < 3; ++v) {
          ne.sparse.emplace_back(3 * row + u, 3 * col + v, m(u, v));
        }
      }
    }
  };
  for (size_t t = 0; t < p.terms.size(); ++t) {
    const auto [a, b] = layout.term_slots[t];
    const int fa = layout.free_index[a];
    const int fb = layout.free_index[b];
    if (fa < 0 && fb < 0) continue;
    const Eigen::Matrix3d ji = RightJacobianInverse(r[t]) * x[b].Matrix();
    const Eigen::Matrix3d jtj = ji.transpose() * ji;
    const Eigen::Vector3d jtr = ji.transpose() * r[t];
    if (fa >= 0) {
      ne.gradient.segment<3>(3 * fa) += jtr;
      add_block(fa, fa, jtj);
      ne.diagonal.segment<3>(3 * fa).array() += jtj.trace() / 3.0;
    }
    if (fb >= 0) {
      ne.gradient.segment<3>(3 * fb) -= jtr;
      add_block(fb, fb, jtj);
      ne.diagonal.segment<3>(3 * fb).array() += jtj.trace() / 3.0;
    }
    if (fa >= 0 && fb >= 0) {
      add_block(fa, fb, -jtj);
      add_block(fb, fa, -jtj);
    }
  }
  return ne;
}

double GradientNorm(const ManifoldProblem& p, const Layout& layout,
                    const std::vector<Rotation>& x, const std::vector<Eigen::Vector3d>& r) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(3 * layout.num_free);
  for (size_t t = 0; t < p.terms.size(); ++t) {
    const auto [a, b] = layout.term_slots[t];
    const int fa = layout.free_index[a];
    const int fb = layout.free_index[b];
    if (fa < 0 && fb < 0) continue;
    const Eigen::Vector3d jtr =
        (RightJacobianInverse(r[t]) * x[b].Matrix()).transpose() * r[t];
    if (fa >= 0) g.segment<3>(3 * fa) += jtr;
    if (fb >= 0) g.segment<3>(3 * fb) -= jtr;
  }
  return g.norm();
}

// Solves (H + lambda D) delta = -g. Returns false on factorization failure.
bool SolveDamped(const NormalEquations& ne, double lambda, bool dense,
                 Eigen::VectorXd* delta) {
  const int n = static_cast<int>(ne.gradient.size());
  const Eigen::VectorXd damping =
      lambda * ne.diagonal.cwiseMax(kMinDiagonal).cwiseMin(1e32);
  if (dense) {
    Eigen::MatrixXd a = ne.dense;
    a.diagonal() += damping;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return false;
    *delta = llt.solve(-ne.gradient);
  } else {
    std::vector<Eigen::Triplet<double>> triplets = ne.sparse;
    for (int k = 0; k < n; ++k) {
      triplets.emplace_back(k, k, damping[k]);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success) return false;
    *delta = ldlt.solve(-ne.gradient);
    if (ldlt.info() != Eigen::Success) return false;
  }
  return delta->allFinite();
}

std::vector<Rotation> Retract(const Layout& layout, const std::vector<Rotation>& x,
                              const Eigen::VectorXd& delta) {
  std::vector<Rotation> out = x;
  for (size_t s = 0; s < x.size(); ++s) {
    const int f = layout.free_index[s];
    if (f >= 0) {
      out[s] = x[s] * ExpMap(delta.segment<3>(3 * f));
    }
  }
  return out;
}

}  // namespace

Eigen::Vector3d TermResidual(const Rotation& meas, const Rotation& ri,
                             const Rotation& rj) {
  return LogMap(meas * ri * rj.Inverse());
}

double EvaluateCost(const ManifoldProblem& problem, const Registration& values) {
  double cost = 0.0;
  for (const auto& t : problem.terms) {
    const double d =
        AngularDistanceRad(t.meas, values.at(t.j) * values.at(t.i).Inverse());
    cost += d * d;
  }
  return cost;
}

SolverResult Solve(const ManifoldProblem& problem) {
  const SolverOptions& opt = problem.options;
  const Layout layout = MakeLayout(problem);
  std::vector<Rotation> x;
  x.reserve(layout.ids.size());
  for (VertexId v : layout.ids) {
    x.push_back(problem.values.at(v));
  }

  SolverResult result;
  result.solution = problem.values;
  SolverReport& report = result.report;
  report.initial_cost = Cost(problem, layout, x);
  report.final_cost = report.initial_cost;
  report.accepted_costs.push_back(report.initial_cost);

  if (layout.num_free == 0 || problem.terms.empty()) {
    report.converged = true;
    report.termination = "no_free_variables";
    return result;
  }

  std::vector<Eigen::Vector3d> r;
  std::mt19937_64 jitter_rng(0x5eedULL);
  for (int attempt = 0;; ++attempt) {
    try {
      r = Residuals(problem, layout, x);
      break;
    } catch (const NearPiAmbiguity&) {
      if (attempt == kJitterRetries) throw;
      std::normal_distribution<double> normal(0.0, 1.0);
      for (size_t s = 0; s < x.size(); ++s) {
        if (layout.free_index[s] < 0) continue;
        Eigen::Vector3d d;
        for (int k = 0; k < 3; ++k) d[k] = normal(jitter_rng);
        x[s] = x[s] * ExpMap(kJitterMagnitude * d.normalized());
      }
      VLOG(2) << "residual at cut locus, jittered free rotations (attempt "
              << attempt + 1 << ")";
    }
  }
  double cost = Cost(problem, layout, x);
  if (cost != report.initial_cost) {
    report.accepted_costs.push_back(cost);
  }

  const bool dense = layout.num_free <= opt.dense_limit;
  double lambda = opt.initial_lambda;
  bool done = false;
  int iter = 0;
  for (; iter < opt.max_iterations && !done; ++iter) {
    const NormalEquations ne = BuildNormalEquations(problem, layout, x, r, dense);
    const double gradient_norm = ne.gradient.norm();
    if (MaxBlockNorm(ne.gradient) < opt.gradient_tol) {
      report.converged = true;
      report.termination = "gradient_tolerance";
      break;
    }
    bool accepted = false;
    while (!accepted) {
      Eigen::VectorXd delta;
      if (!SolveDamped(ne, lambda, dense, &delta)) {
        lambda *= 10.0;
        if (lambda > kMaxLambda) break;
        continue;
      }
      if (MaxBlockNorm(delta) < opt.step_tol) {
        report.converged = true;
        report.termination = "step_tolerance";
        done = true;
        break;
      }
      std::vector<Rotation> trial = Retract(layout, x, delta);
      const double trial_cost = Cost(problem, layout, trial);
      std::vector<Eigen::Vector3d> trial_r;
      // Near the optimum the cost only resolves steps down to ~sqrt(eps);
      // inside the rounding band the gradient decides instead.
      const bool in_band = std::abs(trial_cost - cost) <= kRoundingBand * cost;
      bool usable = trial_cost < cost || in_band;
      if (usable) {
        try {
          trial_r = Residuals(problem, layout, trial);
        } catch (const NearPiAmbiguity&) {
          usable = false;
        }
      }
      if (usable && trial_cost >= cost) {
        usable = GradientNorm(problem, layout, trial, trial_r) < gradient_norm;
      }
      if (!usable) {
        lambda *= 10.0;
        if (lambda > kMaxLambda) break;
        continue;
      }
      accepted = true;
      const double decrease = cost - trial_cost;
      x = std::move(trial);
      r = std::move(trial_r);
      lambda = std::max(lambda / 10.0, 1e-16);
      report.accepted_costs.push_back(trial_cost);
      const double previous = cost;
      cost = trial_cost;
      if (opt.function_tol > 0.0 && decrease <= opt.function_tol * previous) {
        report.converged = true;
        report.termination = "function_tolerance";
        done = true;
      }
    }
    if (!accepted && !done) {
      // No descent step exists at any damping: numerically stationary.
      report.converged = true;
      report.termination = "no_descent";
      ++iter;
      break;
    }
  }
  report.iterations = iter;
  if (!report.converged) {
    report.termination = "max_iterations";
  }
  report.final_cost = cost;
  for (size_t s = 0; s < x.size(); ++s) {
    if (layout.free_index[s] >= 0) {
      result.solution[layout.ids[s]] = x[s];
    }
  }
  return result;
}

double NumericGradientCheck(const ManifoldProblem& problem, double h) {
  if (h < 1e-8 || h > 1e-3) {
    throw std::invalid_argument("gradient check step must lie in [1e-8, 1e-3]");
  }
  const Layout layout = MakeLayout(problem);
  std::vector<Rotation> x;
  for (VertexId v : layout.ids) {
    x.push_back(problem.values.at(v));
  }
  if (layout.num_free == 0) return 0.0;
  const auto r = Residuals(problem, layout, x);
  const NormalEquations ne =
      BuildNormalEquations(problem, layout, x, r, /*dense=*/true);
  // d(sum |r|^2) = 2 J^T r
  const Eigen::VectorXd analytic = 2.0 * ne.gradient;

  double worst = 0.0;
  for (size_t s = 0; s < x.size(); ++s) {
    const int f = layout.free_index[s];
    if (f < 0) continue;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d step = h * Eigen::Vector3d::Unit(k);
      std::vector<Rotation> plus = x;
      std::vector<Rotation> minus = x;
      plus[s] = x[s] * ExpMap(step);
      minus[s] = x[s] * ExpMap(-step);
      const double numeric =
          (Cost(problem, layout, plus) - Cost(problem, layout, minus)) / (2.0 * h);
      const double a = analytic[3 * f + k];
      worst = std::max(worst, std::abs(a - numeric) / (1.0 + std::abs(a)));
    }
  }
  return worst;
}

}  // namespace rotavg
