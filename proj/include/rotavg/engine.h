#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "rotavg/graph.h"
#include "rotavg/solver.h"

namespace rotavg {

struct EngineOptions {
  // Outlier threshold on angular residuals.
  double theta_th_deg = 3.0;
  // Global optimization runs once the selected set has grown by this rate
  // since the last one.
  double global_rate = 0.05;
  SolverOptions local_solver = [] {
    SolverOptions o;
    o.max_iterations = 20;
    return o;
  }();
  SolverOptions global_solver;
};

struct ChainingResult {
  bool passes = false;
  double deviation_deg = 0.0;
};

// Compares R_{j,k} with R_{i,k} R_{i,j}^T.
ChainingResult ChainingCheck(const EpipolarGraph& g, const Triplet& t,
                             double theta_th_deg);

struct SeedResult {
  Triplet triplet;
  // Rotations of (i, j, k); the first is the identity gauge.
  std::array<Rotation, 3> rotations;
  double reward = 0.0;
};

// Best triplet among those passing the chaining check, scored by the sum of
// cos(d_R) over its three edges after a three-rotation optimization. Ties
// go to the lexicographically smallest triplet. Throws NoValidSeed.
SeedResult SelectSeed(const EpipolarGraph& g, const EngineOptions& options);

// Selected set V^s with its estimates, in the frame of its gauge vertex.
class IncrementalState {
 public:
  IncrementalState(int num_vertices, const SeedResult& seed);

  int NumVertices() const { return static_cast<int>(selected_.size()); }
  bool IsSelected(VertexId v) const { return selected_[v] != 0; }
  int NumSelected() const { return static_cast<int>(order_.size()); }
  const std::vector<VertexId>& SelectionOrder() const { return order_; }
  const Rotation& Estimate(VertexId v) const { return estimates_[v]; }
  VertexId gauge_vertex() const { return order_.front(); }

  int last_global_size() const { return last_global_size_; }
  void set_last_global_size(int size) { last_global_size_ = size; }

  // Moves v from the remaining set into the selected set.
  void Admit(VertexId v, const Rotation& r);
  void SetEstimate(VertexId v, const Rotation& r) { estimates_[v] = r; }

  Registration Estimates() const;

 private:
  std::vector<char> selected_;
  std::vector<Rotation> estimates_;
  std::vector<VertexId> order_;
  int last_global_size_ = 0;
};

struct CandidateReward {
  VertexId p = 0;
  // Anchor whose chained pre-computation R_{m,p} R_m scores best.
  VertexId m_star = 0;
  double reward = 0.0;
  int support_size = 0;
  // Edges from p into the selected set.
  int num_edges = 0;
  Rotation init;

  bool self_support_only() const { return support_size == 1; }
};

// Supporting-set rewards for each candidate against the selected set.
// Candidates without an edge into the selected set are skipped and, when
// `skipped` is given, listed there. Output is ordered by vertex id.
std::vector<CandidateReward> CandidateRewards(const EpipolarGraph& g,
                                              const IncrementalState& state,
                                              std::span<const VertexId> candidates,
                                              double theta_th_deg,
                                              std::vector<VertexId>* skipped = nullptr);

// Highest reward, lowest vertex id on ties. Throws EmptyFrontier.
const CandidateReward& SelectNbv(std::span<const CandidateReward> rewards);

struct LocalResult {
  Rotation rotation;
  int num_inliers = 0;
  SolverReport report;
};

// Optimizes p_star alone over the edges into the selected set that agree
// with `init` within the threshold; selected rotations stay fixed.
LocalResult LocalOptimize(const EpipolarGraph& g, const IncrementalState& state,
                          VertexId p_star, const Rotation& init,
                          const EngineOptions& options);

struct GlobalOptResult {
  std::vector<int> inlier_edges;
  SolverReport report;
};

// Classifies the edges inside the selected set against the current
// estimates, then optimizes all selected rotations over the inliers with
// the gauge vertex fixed. Updates `state`.
GlobalOptResult GlobalOptimize(const EpipolarGraph& g, IncrementalState& state,
                               const EngineOptions& options);

// Edges with both endpoints in `reg` whose residual is below the threshold.
std::vector<int> InlierEdges(const EpipolarGraph& g, const Registration& reg,
                             double theta_th_deg);

struct TraceRecord {
  int step = 0;
  VertexId chosen_vertex = 0;
  VertexId anchor_vertex = 0;
  double reward = 0.0;
  int support_size = 0;
  bool self_support_only = false;
  bool global_opt = false;
  double cost_after = 0.0;
  // Selected-set size after admission.
  int size_after = 0;
};

// Local optimization, admission, then the periodic global optimization.
TraceRecord AdmitCandidate(const EpipolarGraph& g, IncrementalState& state,
                           const CandidateReward& choice,
                           const EngineOptions& options, int step);

// True when `size` reached the growth watermark.
bool GlobalOptimizationDue(int size, int last_global_size, double global_rate);

using CandidateFilter = std::function<bool(VertexId)>;
// Evaluated after seeding and after every admission.
using Termination = std::function<bool(const IncrementalState&)>;

struct IncrementalResult {
  SeedResult seed;
  Registration rotations;
  VertexId gauge_vertex = 0;
  std::vector<VertexId> selection_order;
  std::vector<int> inlier_edges;
  std::vector<TraceRecord> trace;
  SolverReport final_report;
};

// Seed, then NBV selection / initialization / optimization until
// `termination` holds or no candidate remains; one final global
// optimization. Throws NoValidSeed, Stalled.
IncrementalResult RunIncremental(const EpipolarGraph& g, const EngineOptions& options,
                                 const CandidateFilter& filter,
                                 const Termination& termination);

// Same loop from a given seed (cluster growth supplies its own).
IncrementalResult RunIncrementalFromSeed(const EpipolarGraph& g, const SeedResult& seed,
                                         const EngineOptions& options,
                                         const CandidateFilter& filter,
                                         const Termination& termination);

// Plain run to exhaustion over a connected graph.
IncrementalResult RunToExhaustion(const EpipolarGraph& g, const EngineOptions& options);

}  // namespace rotavg
