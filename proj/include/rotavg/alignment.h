#pragma once

#include <span>
#include <vector>

#include "rotavg/engine.h"
#include "rotavg/graph.h"
#include "rotavg/solver.h"

namespace rotavg {

enum class AveragingMode { kChordalL2, kGeodesicL1 };

// kChordalL2: principal eigenvector of sum q q^T.
// kGeodesicL1: Weiszfeld iteration started from the chordal mean.
// Throws std::invalid_argument on an empty input.
Rotation SingleRotationAverage(std::span<const Rotation> items, AveragingMode mode);

enum class AlignmentSource { kVertex, kEdge };

// Candidate s with R_global = R_local * s.
struct AlignmentEstimate {
  Rotation s;
  AlignmentSource source = AlignmentSource::kVertex;
  // Common vertex, or the cluster-side endpoint p of edge (m, p).
  VertexId vertex = 0;
  VertexId ref_vertex = 0;
  int edge = -1;
};

// s = R_i^local^T R_i^ref for each vertex in both frames, ascending.
std::vector<AlignmentEstimate> VertexInducedEstimates(const Registration& frame,
                                                      const Registration& reference);

// s = R_p^local^T R_{m,p} R_m^ref for each edge with m in the reference and
// p in the cluster, in edge order.
std::vector<AlignmentEstimate> EdgeInducedEstimates(const EpipolarGraph& g,
                                                    const Registration& frame,
                                                    const Registration& reference);

struct AlignmentRotation {
  int cluster = 0;
  Rotation s;
  // Edge-induced estimates within the threshold of the winning candidate.
  int support = 0;
  AlignmentSource source = AlignmentSource::kVertex;
  int common_vertices = 0;
  int cross_edges = 0;
};

// Picks the candidate with most edge-induced supporters (vertex-induced
// first, lower vertex on ties) and refines it over its supporters. Falls back
// to edge-induced candidates when no vertex is shared. Throws NoAlignmentPath.
AlignmentRotation EstimateClusterAlignment(const EpipolarGraph& g,
                                           const Registration& frame,
                                           const Registration& reference,
                                           double theta_th_deg,
                                           const SolverOptions& solver = {});

struct GlobalAlignOptions {
  double theta_th_deg = 3.0;
  // Hold every reference rotation fixed, not only the gauge vertex.
  bool freeze_reference = false;
  SolverOptions solver;
};

struct GlobalResult {
  Registration rotations;
  std::vector<int> inlier_edges;
  double aligned_cost = 0.0;
  double final_cost = 0.0;
  SolverReport report;
};

// Maps each cluster frame into the reference frame (reference values win on
// shared vertices), classifies every edge against the aligned rotations and
// optimizes over the inliers with the reference gauge vertex fixed.
GlobalResult GlobalAlignAndOptimize(const EpipolarGraph& g,
                                    std::span<const Registration> frames,
                                    const Registration& reference,
                                    VertexId reference_gauge,
                                    std::span<const AlignmentRotation> alignments,
                                    const GlobalAlignOptions& options);

}  // namespace rotavg
