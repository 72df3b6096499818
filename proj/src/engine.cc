#include "rotavg/engine.h"

#include <algorithm>
#include <cmath>

#include <glog/logging.h>

#include "rotavg/errors.h"

namespace rotavg {

ChainingResult ChainingCheck(const EpipolarGraph& g, const Triplet& t,
                             double theta_th_deg) {
  const Rotation& r_ij = g.Measurement(t.i, t.j);
  const Rotation& r_ik = g.Measurement(t.i, t.k);
  const Rotation& r_jk = g.Measurement(t.j, t.k);
  ChainingResult out;
  out.deviation_deg = AngularDistanceDeg(r_jk, r_ik * r_ij.Inverse());
  out.passes = out.deviation_deg < theta_th_deg;
  return out;
}

SeedResult SelectSeed(const EpipolarGraph& g, const EngineOptions& options) {
  bool found = false;
  SeedResult best;
  for (const Triplet& t : EnumerateTriplets(g)) {
    if (!ChainingCheck(g, t, options.theta_th_deg).passes) continue;
    ManifoldProblem problem;
    problem.options = options.local_solver;
    problem.values = {{t.i, Rotation()},
                      {t.j, g.Measurement(t.i, t.j)},
                      {t.k, g.Measurement(t.i, t.k)}};
    problem.fixed = {t.i};
    problem.terms = {{t.i, t.j, g.Measurement(t.i, t.j)},
                     {t.i, t.k, g.Measurement(t.i, t.k)},
                     {t.j, t.k, g.Measurement(t.j, t.k)}};
    const SolverResult solved = Solve(problem);
    double reward = 0.0;
    for (const ResidualTerm& term : problem.terms) {
      reward += std::cos(AngularDistanceRad(
          term.meas,
          solved.solution.at(term.j) * solved.solution.at(term.i).Inverse()));
    }
    if (!found || reward > best.reward) {
      found = true;
      best.triplet = t;
      best.rotations = {solved.solution.at(t.i), solved.solution.at(t.j),
                        solved.solution.at(t.k)};
      best.reward = reward;
    }
  }
  if (!found) {
    throw NoValidSeed("no triplet passes the chaining check");
  }
  return best;
}

IncrementalState::IncrementalState(int num_vertices, const SeedResult& seed)
    : selected_(num_vertices, 0), estimates_(num_vertices) {
  const Triplet& t = seed.triplet;
  Admit(t.i, seed.rotations[0]);
  Admit(t.j, seed.rotations[1]);
  Admit(t.k, seed.rotations[2]);
  last_global_size_ = 3;
}

void IncrementalState::Admit(VertexId v, const Rotation& r) {
  CHECK(!selected_[v]) << "vertex " << v << " already selected";
  selected_[v] = 1;
  estimates_[v] = r;
  order_.push_back(v);
}

Registration IncrementalState::Estimates() const {
  Registration reg;
  for (VertexId v : order_) {
    reg.emplace(v, estimates_[v]);
  }
  return reg;
}

std::vector<CandidateReward> CandidateRewards(const EpipolarGraph& g,
                                              const IncrementalState& state,
                                              std::span<const VertexId> candidates,
                                              double theta_th_deg,
                                              std::vector<VertexId>* skipped) {
  const double theta = DegToRad(theta_th_deg);
  std::vector<VertexId> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end());

  std::vector<CandidateReward> out;
  std::vector<VertexId> anchors;
  std::vector<Rotation> precomputed;
  for (VertexId p : order) {
    anchors.clear();
    precomputed.clear();
    for (const Neighbor& nb : g.Neighbors(p)) {
      if (!state.IsSelected(nb.vertex)) continue;
      anchors.push_back(nb.vertex);
      // R_p^m = R_{m,p} R_m
      precomputed.push_back(g.DirectedMeasurement(nb.edge, nb.vertex) *
                            state.Estimate(nb.vertex));
    }
    if (anchors.empty()) {
      if (skipped != nullptr) skipped->push_back(p);
      continue;
    }
    // d_R(R_{n,p}, R_p^m R_n^T) = d_R(R_p^n, R_p^m) by right invariance.
    CandidateReward best;
    best.p = p;
    best.num_edges = static_cast<int>(anchors.size());
    best.reward = -1.0;
    for (size_t a = 0; a < anchors.size(); ++a) {
      double reward = 0.0;
      int support = 0;
      for (size_t b = 0; b < anchors.size(); ++b) {
        const double dev =
            a == b ? 0.0 : AngularDistanceRad(precomputed[b], precomputed[a]);
        if (dev < theta) {
          reward += std::cos(dev);
          ++support;
        }
      }
      if (reward > best.reward) {
        best.reward = reward;
        best.support_size = support;
        best.m_star = anchors[a];
        best.init = precomputed[a];
      }
    }
    out.push_back(best);
  }
  return out;
}

const CandidateReward& SelectNbv(std::span<const CandidateReward> rewards) {
  if (rewards.empty()) {
    throw EmptyFrontier("no candidate to select");
  }
  const CandidateReward* best = &rewards.front();
  for (const CandidateReward& c : rewards) {
    if (c.reward > best->reward || (c.reward == best->reward && c.p < best->p)) {
      best = &c;
    }
  }
  return *best;
}

LocalResult LocalOptimize(const EpipolarGraph& g, const IncrementalState& state,
                          VertexId p_star, const Rotation& init,
                          const EngineOptions& options) {
  const double theta = DegToRad(options.theta_th_deg);
  ManifoldProblem problem;
  problem.options = options.local_solver;
  problem.values[p_star] = init;
  for (const Neighbor& nb : g.Neighbors(p_star)) {
    if (!state.IsSelected(nb.vertex)) continue;
    const Rotation& r_np = g.DirectedMeasurement(nb.edge, nb.vertex);
    const Rotation& r_n = state.Estimate(nb.vertex);
    if (AngularDistanceRad(r_np, init * r_n.Inverse()) < theta) {
      problem.values[nb.vertex] = r_n;
      problem.fixed.insert(nb.vertex);
      problem.terms.push_back({nb.vertex, p_star, r_np});
    }
  }
  LocalResult out;
  out.rotation = init;
  out.num_inliers = static_cast<int>(problem.terms.size());
  if (problem.terms.empty()) {
    return out;
  }
  SolverResult solved = Solve(problem);
  out.rotation = solved.solution.at(p_star);
  out.report = std::move(solved.report);
  return out;
}

std::vector<int> InlierEdges(const EpipolarGraph& g, const Registration& reg,
                             double theta_th_deg) {
  const double theta = DegToRad(theta_th_deg);
  std::vector<int> inliers;
  for (int e = 0; e < g.NumEdges(); ++e) {
    const auto& m = g.Edge(e);
    auto ri = reg.find(m.i);
    auto rj = reg.find(m.j);
    if (ri == reg.end() || rj == reg.end()) continue;
    if (AngularDistanceRad(m.rot, rj->second * ri->second.Inverse()) < theta) {
      inliers.push_back(e);
    }
  }
  return inliers;
}

GlobalOptResult GlobalOptimize(const EpipolarGraph& g, IncrementalState& state,
                               const EngineOptions& options) {
  CHECK_GE(state.NumSelected(), 3);
  const double theta = DegToRad(options.theta_th_deg);
  ManifoldProblem problem;
  problem.options = options.global_solver;
  problem.fixed = {state.gauge_vertex()};
  problem.values = state.Estimates();

  GlobalOptResult out;
  std::vector<VertexId> sorted = state.SelectionOrder();
  std::sort(sorted.begin(), sorted.end());
  for (VertexId v : sorted) {
    for (const Neighbor& nb : g.Neighbors(v)) {
      if (nb.vertex <= v || !state.IsSelected(nb.vertex)) continue;
      const auto& m = g.Edge(nb.edge);
      const double dev = AngularDistanceRad(
          m.rot, state.Estimate(m.j) * state.Estimate(m.i).Inverse());
      if (dev < theta) {
        out.inlier_edges.push_back(nb.edge);
        problem.terms.push_back({m.i, m.j, m.rot});
      }
    }
  }
  std::sort(out.inlier_edges.begin(), out.inlier_edges.end());
  SolverResult solved = Solve(problem);
  if (!solved.report.converged) {
    LOG(WARNING) << "global optimization over " << state.NumSelected()
                 << " rotations did not converge; keeping best iterate";
  }
  for (const auto& [v, r] : solved.solution) {
    state.SetEstimate(v, r);
  }
  out.report = std::move(solved.report);
  return out;
}

bool GlobalOptimizationDue(int size, int last_global_size, double global_rate) {
  // Tolerance absorbs the binary representation of rates such as 0.05.
  return size >= last_global_size * (1.0 + global_rate) - 1e-9;
}

TraceRecord AdmitCandidate(const EpipolarGraph& g, IncrementalState& state,
                           const CandidateReward& choice,
                           const EngineOptions& options, int step) {
  TraceRecord rec;
  rec.step = step;
  rec.chosen_vertex = choice.p;
  rec.anchor_vertex = choice.m_star;
  rec.reward = choice.reward;
  rec.support_size = choice.support_size;
  rec.self_support_only = choice.self_support_only();

  const LocalResult local = LocalOptimize(g, state, choice.p, choice.init, options);
  state.Admit(choice.p, local.rotation);
  rec.cost_after = local.report.final_cost;
  rec.size_after = state.NumSelected();
  if (GlobalOptimizationDue(state.NumSelected(), state.last_global_size(),
                            options.global_rate)) {
    const GlobalOptResult global = GlobalOptimize(g, state, options);
    state.set_last_global_size(state.NumSelected());
    rec.global_opt = true;
    rec.cost_after = global.report.final_cost;
  }
  VLOG(1) << "step " << step << ": vertex " << choice.p << " via " << choice.m_star
          << " reward " << choice.reward << " support " << choice.support_size
          << (rec.global_opt ? " [global]" : "");
  return rec;
}

IncrementalResult RunIncrementalFromSeed(const EpipolarGraph& g, const SeedResult& seed,
                                         const EngineOptions& options,
                                         const CandidateFilter& filter,
                                         const Termination& termination) {
  IncrementalState state(g.NumVertices(), seed);
  IncrementalResult result;
  result.seed = seed;

  // Number of edges from each vertex into the selected set.
  std::vector<int> edges_in(g.NumVertices(), 0);
  auto on_admit = [&](VertexId v) {
    for (const Neighbor& nb : g.Neighbors(v)) ++edges_in[nb.vertex];
  };
  for (VertexId v : state.SelectionOrder()) on_admit(v);

  int step = 0;
  std::vector<VertexId> frontier;
  while (!termination(state)) {
    frontier.clear();
    bool remaining_without_edge = false;
    for (VertexId v = 0; v < g.NumVertices(); ++v) {
      if (state.IsSelected(v) || (filter && !filter(v))) continue;
      if (edges_in[v] > 0) {
        frontier.push_back(v);
      } else {
        remaining_without_edge = true;
      }
    }
    if (frontier.empty()) {
      if (remaining_without_edge) {
        throw Stalled("remaining vertices have no edge into the selected set");
      }
      break;
    }
    const auto rewards = CandidateRewards(g, state, frontier, options.theta_th_deg);
    if (rewards.empty()) {
      throw Stalled("frontier produced no candidate reward");
    }
    const CandidateReward& choice = SelectNbv(rewards);
    result.trace.push_back(AdmitCandidate(g, state, choice, options, ++step));
    on_admit(choice.p);
  }

  const GlobalOptResult final_opt = GlobalOptimize(g, state, options);
  state.set_last_global_size(state.NumSelected());
  result.rotations = state.Estimates();
  result.gauge_vertex = state.gauge_vertex();
  result.selection_order = state.SelectionOrder();
  result.inlier_edges = final_opt.inlier_edges;
  result.final_report = final_opt.report;
  return result;
}

IncrementalResult RunIncremental(const EpipolarGraph& g, const EngineOptions& options,
                                 const CandidateFilter& filter,
                                 const Termination& termination) {
  const SeedResult seed = SelectSeed(g, options);
  return RunIncrementalFromSeed(g, seed, options, filter, termination);
}

IncrementalResult RunToExhaustion(const EpipolarGraph& g, const EngineOptions& options) {
  const int n = g.NumVertices();
  return RunIncremental(g, options, nullptr, [n](const IncrementalState& s) {
    return s.NumSelected() == n;
  });
}

}  // namespace rotavg
