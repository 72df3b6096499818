#include "rotavg/alignment.h"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <glog/logging.h>

#include "rotavg/errors.h"

namespace rotavg {

namespace {

constexpr int kWeiszfeldIterations = 100;
constexpr double kWeiszfeldTolerance = 1e-10;

// Tangent vector v with b = a * exp(v). Unlike LogMap this never throws; at
// exactly pi it picks the canonical axis.
Eigen::Vector3d TangentTo(const Rotation& a, const Rotation& b) {
  const Eigen::Quaterniond q = (a.Inverse() * b).quaternion();
  const Eigen::Vector3d vec = q.vec();
  const double s = vec.norm();
  if (s == 0.0) return Eigen::Vector3d::Zero();
  const double angle = 2.0 * std::atan2(s, std::abs(q.w()));
  return (q.w() < 0 ? -1.0 : 1.0) * angle / s * vec;
}

Rotation ChordalMean(std::span<const Rotation> items) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (const Rotation& r : items) {
    const Eigen::Vector4d q(r.w(), r.x(), r.y(), r.z());
    m += q * q.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(m);
  const Eigen::Vector4d top = eig.eigenvectors().col(3);
  return Rotation::FromQuaternion(top(0), top(1), top(2), top(3));
}

Rotation GeodesicMedian(std::span<const Rotation> items, const Rotation& start) {
  Rotation x = start;
  for (int it = 0; it < kWeiszfeldIterations; ++it) {
    Eigen::Vector3d num = Eigen::Vector3d::Zero();
    double den = 0.0;
    int coincident = 0;
    for (const Rotation& r : items) {
      const Eigen::Vector3d v = TangentTo(x, r);
      const double d = v.norm();
      if (d < 1e-14) {
        ++coincident;
        continue;
      }
      num += v / d;
      den += 1.0 / d;
    }
    if (den == 0.0) break;
    // Modified step when x sits on a data point; x is optimal once the
    // coincident weight outweighs the pull of the others.
    Eigen::Vector3d step = num / den;
    if (coincident > 0) {
      const double pull = num.norm();
      if (pull <= coincident) break;
      step *= 1.0 - coincident / pull;
    }
    x = x * ExpMap(step);
    if (step.norm() < kWeiszfeldTolerance) break;
  }
  return x;
}

}  // namespace

Rotation SingleRotationAverage(std::span<const Rotation> items, AveragingMode mode) {
  if (items.empty()) throw std::invalid_argument("cannot average an empty set");
  const Rotation chordal = ChordalMean(items);
  if (mode == AveragingMode::kChordalL2) return chordal;
  return GeodesicMedian(items, chordal);
}

std::vector<AlignmentEstimate> VertexInducedEstimates(const Registration& frame,
                                                      const Registration& reference) {
  std::vector<AlignmentEstimate> out;
  for (const auto& [v, local] : frame) {
    auto ref = reference.find(v);
    if (ref == reference.end()) continue;
    AlignmentEstimate est;
    est.s = local.Inverse() * ref->second;
    est.source = AlignmentSource::kVertex;
    est.vertex = est.ref_vertex = v;
    out.push_back(est);
  }
  return out;
}

std::vector<AlignmentEstimate> EdgeInducedEstimates(const EpipolarGraph& g,
                                                    const Registration& frame,
                                                    const Registration& reference) {
  std::vector<AlignmentEstimate> out;
  auto add = [&](int e, VertexId m, VertexId p) {
    auto ref = reference.find(m);
    auto local = frame.find(p);
    if (ref == reference.end() || local == frame.end()) return;
    AlignmentEstimate est;
    // R_p = R_{m,p} R_m
    est.s = local->second.Inverse() * g.Measurement(m, p) * ref->second;
    est.source = AlignmentSource::kEdge;
    est.vertex = p;
    est.ref_vertex = m;
    est.edge = e;
    out.push_back(est);
  };
  for (int e = 0; e < g.NumEdges(); ++e) {
    const auto& edge = g.Edge(e);
    add(e, edge.i, edge.j);
    add(e, edge.j, edge.i);
  }
  return out;
}

AlignmentRotation EstimateClusterAlignment(const EpipolarGraph& g,
                                           const Registration& frame,
                                           const Registration& reference,
                                           double theta_th_deg,
                                           const SolverOptions& solver) {
  const auto vertex_est = VertexInducedEstimates(frame, reference);
  const auto edge_est = EdgeInducedEstimates(g, frame, reference);
  if (vertex_est.empty() && edge_est.empty()) {
    throw NoAlignmentPath("cluster shares neither a vertex nor an edge with the reference");
  }
  const double theta = DegToRad(theta_th_deg);
  const auto& candidates = vertex_est.empty() ? edge_est : vertex_est;

  auto supporters = [&](const Rotation& s) {
    std::vector<const AlignmentEstimate*> out;
    for (const AlignmentEstimate& e : edge_est) {
      if (AngularDistanceRad(e.s, s) < theta) out.push_back(&e);
    }
    return out;
  };
  const AlignmentEstimate* best = nullptr;
  std::vector<const AlignmentEstimate*> best_support;
  for (const AlignmentEstimate& c : candidates) {
    auto support = supporters(c.s);
    if (best == nullptr || support.size() > best_support.size()) {
      best = &c;
      best_support = std::move(support);
    }
  }

  AlignmentRotation out;
  out.s = best->s;
  out.source = best->source;
  out.support = static_cast<int>(best_support.size());
  out.common_vertices = static_cast<int>(vertex_est.size());
  out.cross_edges = static_cast<int>(edge_est.size());
  if (best_support.empty()) return out;

  // Minimize sum d_R^2(R_{m,p}, (R_p s) R_m^T) = sum d_R^2(s_e, s).
  ManifoldProblem problem;
  problem.options = solver;
  problem.values = {{0, Rotation()}, {1, best->s}};
  problem.fixed = {0};
  for (const AlignmentEstimate* e : best_support) problem.terms.push_back({0, 1, e->s});
  out.s = Solve(problem).solution.at(1);
  return out;
}

GlobalResult GlobalAlignAndOptimize(const EpipolarGraph& g,
                                    std::span<const Registration> frames,
                                    const Registration& reference,
                                    VertexId reference_gauge,
                                    std::span<const AlignmentRotation> alignments,
                                    const GlobalAlignOptions& options) {
  CHECK_EQ(frames.size(), alignments.size());
  CHECK(reference.contains(reference_gauge));
  ManifoldProblem problem;
  problem.options = options.solver;
  Registration& values = problem.values;
  values = reference;
  for (size_t c = 0; c < frames.size(); ++c) {
    for (const auto& [v, local] : frames[c]) {
      if (!reference.contains(v)) values.emplace(v, local * alignments[c].s);
    }
  }
  if (options.freeze_reference) {
    for (const auto& [v, r] : reference) problem.fixed.insert(v);
  } else {
    problem.fixed = {reference_gauge};
  }

  GlobalResult out;
  out.inlier_edges = InlierEdges(g, values, options.theta_th_deg);
  for (int e : out.inlier_edges) {
    const auto& m = g.Edge(e);
    problem.terms.push_back({m.i, m.j, m.rot});
  }
  SolverResult solved = Solve(problem);
  if (!solved.report.converged) {
    LOG(WARNING) << "final optimization did not converge; keeping best iterate";
  }
  out.rotations = std::move(solved.solution);
  out.aligned_cost = solved.report.initial_cost;
  out.final_cost = solved.report.final_cost;
  out.report = std::move(solved.report);
  return out;
}

}  // namespace rotavg
