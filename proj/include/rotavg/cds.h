#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rotavg/engine.h"
#include "rotavg/graph.h"

namespace rotavg {

// A connected dominating set, optionally carrying rotations estimated in the
// frame of its gauge vertex.
struct ReferenceSet {
  std::vector<VertexId> members;  // ascending
  Registration rotations;         // empty for the traditional extractor
  bool connected = false;
  bool dominating = false;
  int n_ref = 0;
  std::optional<double> e_ref;  // filled by evaluation when GT is known
  VertexId gauge_vertex = 0;
  std::vector<TraceRecord> trace;
  std::vector<int> inlier_edges;
};

bool IsConnectedDominating(const EpipolarGraph& g, std::span<const VertexId> s);

struct TraditionalCdsOptions {
  // Empty: unweighted neighbor counts. Otherwise one weight per edge, and a
  // vertex scores the summed weight of its edges to white neighbors.
  std::vector<double> edge_weights;
  // When set, score ties are broken by a seeded random vertex priority
  // instead of the lowest index.
  std::optional<uint64_t> tie_break_seed;
};

// Greedy white/gray/black marking. Requires a connected graph.
ReferenceSet TraditionalCds(const EpipolarGraph& g,
                            const TraditionalCdsOptions& options = {});

// Incremental estimation stopped as soon as the selected set dominates the
// graph. Throws NoValidSeed, Stalled.
ReferenceSet TaskSpecificCds(const EpipolarGraph& g, const EngineOptions& options);

// Union of `extractions` randomized traditional CDSs, with rotations
// estimated on the induced sub-graph of the union.
ReferenceSet RandomizedUnionReference(const EpipolarGraph& g,
                                      const EngineOptions& options, int extractions,
                                      uint64_t seed);

inline constexpr int kBruteForceCdsLimit = 16;

// Minimum connected dominating set, lexicographically smallest among the
// minima. Throws TooLarge above kBruteForceCdsLimit vertices.
std::vector<VertexId> BruteForceMinCds(const EpipolarGraph& g);

}  // namespace rotavg
