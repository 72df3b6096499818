#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rotavg/alignment.h"
#include "rotavg/cds.h"
#include "rotavg/clustering.h"
#include "rotavg/engine.h"
#include "rotavg/graph.h"

namespace rotavg {

enum class PipelineMode { kIra, kIrav4, kIrav3PlusRef, kSpanningTree };

std::string_view ModeName(PipelineMode mode);
// Throws ConfigError on an unknown name.
PipelineMode ParseMode(std::string_view name);

struct PipelineConfig {
  PipelineMode mode = PipelineMode::kIrav4;
  EngineOptions engine;
  // 0: data-driven cluster count. 1: plain incremental run. N > 1: at most
  // N communities.
  int clusters = 0;
  CommunityOptions communities;
  bool freeze_reference = false;
  uint64_t rng_seed = 0;
  // Randomized traditional extractions unioned into the irav3plus-ref
  // reference.
  int reference_extractions = 5;
};

struct ClusterSummary {
  int size = 0;
  int common_vertices = 0;
  int cross_edges = 0;
  int support = 0;
  AlignmentSource source = AlignmentSource::kVertex;
  double alignment_angle_deg = 0.0;
};

struct PipelineResult {
  // Mode actually executed (`--clusters 1` turns the cluster modes into ira).
  PipelineMode mode = PipelineMode::kIra;
  int component_size = 0;
  // All ids below refer to the input graph.
  Registration rotations;
  std::vector<int> inlier_edges;
  VertexId gauge_vertex = 0;
  std::optional<ReferenceSet> reference;
  std::vector<int> assignment;  // cluster per vertex, -1 outside clusters
  std::vector<ClusterSummary> clusters;
  std::vector<TraceRecord> trace;  // plain run or reference growth
  double aligned_cost = 0.0;
  double final_cost = 0.0;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
};

// Runs the chosen method on the largest connected component.
PipelineResult RunPipeline(const EpipolarGraph& g, const PipelineConfig& config);

}  // namespace rotavg
