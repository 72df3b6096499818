#pragma once

#include <vector>

#include "rotavg/graph.h"

namespace rotavg {

// Per-edge count of 3-cliques through the edge that pass the chaining check.
std::vector<int> TripletSupport(const EpipolarGraph& g, double theta_th_deg);

// Maximum-support spanning tree (Kruskal, lower edge id on ties) chained
// outward from the lowest vertex, which is held at the identity. No
// optimization. Requires a connected graph.
Registration SpanningTreeChaining(const EpipolarGraph& g, double theta_th_deg);

}  // namespace rotavg
