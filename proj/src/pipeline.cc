#include "rotavg/pipeline.h"

#include <algorithm>
#include <chrono>

#include <glog/logging.h>

#include "rotavg/baseline.h"
#include "rotavg/errors.h"

namespace rotavg {

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::vector<std::pair<std::string, double>>* out) : out_(out) {}

  void Mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    out_->push_back({stage, std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>* out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

double InlierCost(const EpipolarGraph& g, const Registration& values,
                  const std::vector<int>& inliers) {
  ManifoldProblem problem;
  problem.values = values;
  for (int e : inliers) {
    const auto& m = g.Edge(e);
    problem.terms.push_back({m.i, m.j, m.rot});
  }
  return EvaluateCost(problem, values);
}

// Result in the ids of the operating component.
struct LocalRun {
  Registration rotations;
  std::vector<int> inlier_edges;
  VertexId gauge_vertex = 0;
  std::optional<ReferenceSet> reference;
  std::vector<int> assignment;
  std::vector<ClusterSummary> clusters;
  std::vector<TraceRecord> trace;
  double aligned_cost = 0.0;
  double final_cost = 0.0;
};

LocalRun RunIra(const EpipolarGraph& g, const PipelineConfig& config, StageTimer& timer) {
  const IncrementalResult run = RunToExhaustion(g, config.engine);
  timer.Mark("incremental");
  LocalRun out;
  out.rotations = run.rotations;
  out.inlier_edges = run.inlier_edges;
  out.gauge_vertex = run.gauge_vertex;
  out.trace = run.trace;
  out.aligned_cost = run.final_report.initial_cost;
  out.final_cost = run.final_report.final_cost;
  return out;
}

LocalRun RunSpanningTree(const EpipolarGraph& g, const PipelineConfig& config,
                         StageTimer& timer) {
  LocalRun out;
  out.rotations = SpanningTreeChaining(g, config.engine.theta_th_deg);
  out.inlier_edges = InlierEdges(g, out.rotations, config.engine.theta_th_deg);
  out.aligned_cost = out.final_cost = InlierCost(g, out.rotations, out.inlier_edges);
  timer.Mark("spanning_tree");
  return out;
}

LocalRun RunClustered(const EpipolarGraph& g, const PipelineConfig& config,
                      StageTimer& timer) {
  LocalRun out;
  ReferenceSet reference =
      config.mode == PipelineMode::kIrav4
          ? TaskSpecificCds(g, config.engine)
          : RandomizedUnionReference(g, config.engine, config.reference_extractions,
                                     config.rng_seed);
  timer.Mark("reference");

  CommunityOptions community_options = config.communities;
  if (config.clusters > 1) community_options.max_communities = config.clusters;
  std::vector<SeedResult> seeds;
  for (CommunitySeed& s : CommunitySeeds(g, community_options, config.engine)) {
    seeds.push_back(std::move(s.seed));
  }
  const ClusterState clusters = GrowClusters(g, seeds, config.engine);
  timer.Mark("clusters");

  std::vector<Registration> frames;
  std::vector<AlignmentRotation> alignments;
  for (size_t c = 0; c < clusters.clusters.size(); ++c) {
    frames.push_back(clusters.clusters[c].rotations);
    AlignmentRotation a = EstimateClusterAlignment(g, frames.back(), reference.rotations,
                                                   config.engine.theta_th_deg,
                                                   config.engine.local_solver);
    a.cluster = static_cast<int>(c);
    ClusterSummary summary;
    summary.size = static_cast<int>(frames.back().size());
    summary.common_vertices = a.common_vertices;
    summary.cross_edges = a.cross_edges;
    summary.support = a.support;
    summary.source = a.source;
    summary.alignment_angle_deg = a.s.Angle() * 180.0 / kPi;
    out.clusters.push_back(summary);
    alignments.push_back(std::move(a));
  }
  timer.Mark("alignment");

  GlobalAlignOptions align_options;
  align_options.theta_th_deg = config.engine.theta_th_deg;
  align_options.freeze_reference = config.freeze_reference;
  align_options.solver = config.engine.global_solver;
  GlobalResult global = GlobalAlignAndOptimize(g, frames, reference.rotations,
                                               reference.gauge_vertex, alignments,
                                               align_options);
  timer.Mark("global");

  out.rotations = std::move(global.rotations);
  out.inlier_edges = std::move(global.inlier_edges);
  out.gauge_vertex = reference.gauge_vertex;
  out.assignment = clusters.assignment;
  out.trace = reference.trace;
  out.aligned_cost = global.aligned_cost;
  out.final_cost = global.final_cost;
  out.reference = std::move(reference);
  return out;
}

}  // namespace

std::string_view ModeName(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::kIra:
      return "ira";
    case PipelineMode::kIrav4:
      return "irav4";
    case PipelineMode::kIrav3PlusRef:
      return "irav3plus-ref";
    case PipelineMode::kSpanningTree:
      return "spanning-tree";
  }
  return "unknown";
}

PipelineMode ParseMode(std::string_view name) {
  for (PipelineMode m : {PipelineMode::kIra, PipelineMode::kIrav4,
                         PipelineMode::kIrav3PlusRef, PipelineMode::kSpanningTree}) {
    if (ModeName(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

PipelineResult RunPipeline(const EpipolarGraph& g, const PipelineConfig& config) {
  if (config.clusters < 0) throw ConfigError("cluster count must be non-negative");
  if (config.engine.theta_th_deg <= 0.0) throw ConfigError("threshold must be positive");
  if (config.engine.global_rate < 0.0) throw ConfigError("global rate must be non-negative");

  PipelineResult result;
  StageTimer timer(&result.timings);
  const std::vector<VertexId> component = LargestComponent(g);
  if (static_cast<int>(component.size()) < g.NumVertices()) {
    LOG(WARNING) << "operating on the largest component (" << component.size() << " of "
                 << g.NumVertices() << " vertices)";
  }
  const Subgraph sub = InducedSubgraph(g, component);
  result.component_size = sub.graph.NumVertices();

  result.mode = config.mode;
  if (config.clusters == 1 && (config.mode == PipelineMode::kIrav4 ||
                               config.mode == PipelineMode::kIrav3PlusRef)) {
    result.mode = PipelineMode::kIra;
  }
  LocalRun run;
  switch (result.mode) {
    case PipelineMode::kIra:
      run = RunIra(sub.graph, config, timer);
      break;
    case PipelineMode::kSpanningTree:
      run = RunSpanningTree(sub.graph, config, timer);
      break;
    case PipelineMode::kIrav4:
    case PipelineMode::kIrav3PlusRef:
      run = RunClustered(sub.graph, config, timer);
      break;
  }

  auto parent = [&](VertexId v) { return sub.to_parent[v]; };
  for (const auto& [v, r] : run.rotations) result.rotations.emplace(parent(v), r);
  for (int e : run.inlier_edges) result.inlier_edges.push_back(sub.edge_to_parent[e]);
  std::sort(result.inlier_edges.begin(), result.inlier_edges.end());
  result.gauge_vertex = parent(run.gauge_vertex);
  result.trace = std::move(run.trace);
  for (TraceRecord& rec : result.trace) {
    rec.chosen_vertex = parent(rec.chosen_vertex);
    rec.anchor_vertex = parent(rec.anchor_vertex);
  }
  if (run.reference) {
    ReferenceSet ref = std::move(*run.reference);
    for (VertexId& v : ref.members) v = parent(v);
    Registration rotations;
    for (const auto& [v, r] : ref.rotations) rotations.emplace(parent(v), r);
    ref.rotations = std::move(rotations);
    ref.gauge_vertex = parent(ref.gauge_vertex);
    for (int& e : ref.inlier_edges) e = sub.edge_to_parent[e];
    std::sort(ref.inlier_edges.begin(), ref.inlier_edges.end());
    ref.trace = result.trace;
    result.reference = std::move(ref);
  }
  if (!run.assignment.empty()) {
    result.assignment.assign(g.NumVertices(), -1);
    for (VertexId v = 0; v < sub.graph.NumVertices(); ++v) {
      result.assignment[parent(v)] = run.assignment[v];
    }
  }
  result.clusters = std::move(run.clusters);
  result.aligned_cost = run.aligned_cost;
  result.final_cost = run.final_cost;
  return result;
}

}  // namespace rotavg
