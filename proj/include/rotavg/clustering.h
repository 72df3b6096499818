#pragma once

#include <vector>

#include "rotavg/engine.h"
#include "rotavg/graph.h"

namespace rotavg {

struct CommunityOptions {
  double resolution = 1.0;
  // Smaller communities are merged into their largest adjacent community.
  int min_size = 10;
  // When positive, keep merging the smallest community until at most this
  // many remain.
  int max_communities = 0;
};

// Louvain modularity optimization on the unweighted graph with a fixed
// vertex order. Returns a community label per vertex, labels dense and
// numbered by smallest member.
std::vector<int> DetectCommunities(const EpipolarGraph& g,
                                   const CommunityOptions& options = {});

// Newman modularity of a labeling.
double Modularity(const EpipolarGraph& g, const std::vector<int>& labels,
                  double resolution = 1.0);

struct CommunitySeed {
  int community = 0;
  std::vector<VertexId> members;
  SeedResult seed;  // in the vertex ids of the full graph
};

// One seed per community; communities without a valid triplet are dropped.
// Throws NoValidSeed when none remains.
std::vector<CommunitySeed> CommunitySeeds(const EpipolarGraph& g,
                                          const CommunityOptions& community_options,
                                          const EngineOptions& options);

struct ClusterFrame {
  Registration rotations;  // cluster-local frame
  VertexId gauge_vertex = 0;
  std::vector<VertexId> selection_order;
  std::vector<TraceRecord> trace;
  std::vector<int> inlier_edges;
  SolverReport final_report;
};

struct ClusterState {
  std::vector<int> assignment;  // cluster per vertex, -1 when unassigned
  std::vector<ClusterFrame> clusters;
};

// Grows all clusters together: each step admits the (vertex, cluster) pair
// with the highest reward, ties to the lower cluster then the lower vertex.
// Seeds must be vertex-disjoint. Throws Stalled.
ClusterState GrowClusters(const EpipolarGraph& g, const std::vector<SeedResult>& seeds,
                          const EngineOptions& options);

}  // namespace rotavg
