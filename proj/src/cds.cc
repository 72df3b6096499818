#include "rotavg/cds.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <glog/logging.h>

#include "rotavg/errors.h"

namespace rotavg {

bool IsConnectedDominating(const EpipolarGraph& g, std::span<const VertexId> s) {
  const int n = g.NumVertices();
  if (n == 0) return s.empty();
  if (s.empty()) return false;
  std::vector<char> in_set(n, 0);
  for (VertexId v : s) {
    CHECK(v >= 0 && v < n) << "vertex " << v << " out of range";
    in_set[v] = 1;
  }
  // Connectivity of the induced subgraph.
  std::vector<char> reached(n, 0);
  std::vector<VertexId> stack = {s.front()};
  reached[s.front()] = 1;
  int count = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (const Neighbor& nb : g.Neighbors(v)) {
      if (in_set[nb.vertex] && !reached[nb.vertex]) {
        reached[nb.vertex] = 1;
        ++count;
        stack.push_back(nb.vertex);
      }
    }
  }
  const int size = static_cast<int>(std::count(in_set.begin(), in_set.end(), 1));
  if (count != size) return false;
  for (VertexId v = 0; v < n; ++v) {
    if (in_set[v]) continue;
    bool dominated = false;
    for (const Neighbor& nb : g.Neighbors(v)) {
      if (in_set[nb.vertex]) {
        dominated = true;
        break;
      }
    }
    if (!dominated) return false;
  }
  return true;
}

namespace {

enum Color : char { kWhite, kGray, kBlack };

}  // namespace

ReferenceSet TraditionalCds(const EpipolarGraph& g, const TraditionalCdsOptions& options) {
  const int n = g.NumVertices();
  const bool weighted = !options.edge_weights.empty();
  if (weighted && static_cast<int>(options.edge_weights.size()) != g.NumEdges()) {
    throw ConfigError("edge weight table must have one entry per edge");
  }
  // Lower rank wins ties.
  std::vector<int> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  if (options.tie_break_seed) {
    std::vector<VertexId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(*options.tie_break_seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (int k = 0; k < n; ++k) rank[order[k]] = k;
  }

  std::vector<Color> color(n, kWhite);
  auto score = [&](VertexId v) {
    double s = 0.0;
    for (const Neighbor& nb : g.Neighbors(v)) {
      if (color[nb.vertex] == kWhite) s += weighted ? options.edge_weights[nb.edge] : 1.0;
    }
    return s;
  };
  auto pick = [&](Color eligible) {
    VertexId best = -1;
    double best_score = 0.0;
    for (VertexId v = 0; v < n; ++v) {
      if (color[v] != eligible) continue;
      const double s = score(v);
      if (best < 0 || s > best_score || (s == best_score && rank[v] < rank[best])) {
        best = v;
        best_score = s;
      }
    }
    return best;
  };
  auto blacken = [&](VertexId v) {
    color[v] = kBlack;
    for (const Neighbor& nb : g.Neighbors(v)) {
      if (color[nb.vertex] == kWhite) color[nb.vertex] = kGray;
    }
  };

  ReferenceSet out;
  if (n > 0) {
    blacken(pick(kWhite));
    while (std::find(color.begin(), color.end(), kWhite) != color.end()) {
      const VertexId v = pick(kGray);
      if (v < 0) throw std::invalid_argument("traditional CDS needs a connected graph");
      blacken(v);
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    if (color[v] == kBlack) out.members.push_back(v);
  }
  out.n_ref = static_cast<int>(out.members.size());
  out.connected = out.dominating = IsConnectedDominating(g, out.members);
  return out;
}

namespace {

ReferenceSet FromIncremental(const EpipolarGraph& g, const IncrementalResult& run) {
  ReferenceSet out;
  out.members = run.selection_order;
  std::sort(out.members.begin(), out.members.end());
  out.rotations = run.rotations;
  out.n_ref = static_cast<int>(out.members.size());
  out.gauge_vertex = run.gauge_vertex;
  out.trace = run.trace;
  out.inlier_edges = run.inlier_edges;
  out.connected = out.dominating = IsConnectedDominating(g, out.members);
  return out;
}

}  // namespace

ReferenceSet TaskSpecificCds(const EpipolarGraph& g, const EngineOptions& options) {
  const int n = g.NumVertices();
  // Vertices in or adjacent to the selected set, updated per admission.
  std::vector<char> dominated(n, 0);
  int num_dominated = 0;
  size_t seen = 0;
  auto mark = [&](VertexId v) {
    if (!dominated[v]) {
      dominated[v] = 1;
      ++num_dominated;
    }
  };
  auto termination = [&](const IncrementalState& state) {
    const auto& order = state.SelectionOrder();
    for (; seen < order.size(); ++seen) {
      mark(order[seen]);
      for (const Neighbor& nb : g.Neighbors(order[seen])) mark(nb.vertex);
    }
    return num_dominated == n;
  };
  const IncrementalResult run = RunIncremental(g, options, nullptr, termination);
  ReferenceSet out = FromIncremental(g, run);
  CHECK(out.dominating) << "selected set stopped before dominating the graph";
  return out;
}

ReferenceSet RandomizedUnionReference(const EpipolarGraph& g,
                                      const EngineOptions& options, int extractions,
                                      uint64_t seed) {
  if (extractions < 1) throw ConfigError("need at least one CDS extraction");
  std::vector<char> in_union(g.NumVertices(), 0);
  for (int k = 0; k < extractions; ++k) {
    TraditionalCdsOptions cds_options;
    cds_options.tie_break_seed = seed + static_cast<uint64_t>(k);
    for (VertexId v : TraditionalCds(g, cds_options).members) in_union[v] = 1;
  }
  std::vector<VertexId> members;
  for (VertexId v = 0; v < g.NumVertices(); ++v) {
    if (in_union[v]) members.push_back(v);
  }
  // Each CDS dominates the graph, so the union of connected CDSs is connected.
  const Subgraph sub = InducedSubgraph(g, members);
  const IncrementalResult local = RunToExhaustion(sub.graph, options);

  ReferenceSet out;
  out.members = members;
  out.n_ref = static_cast<int>(members.size());
  for (const auto& [v, r] : local.rotations) out.rotations.emplace(sub.to_parent[v], r);
  out.gauge_vertex = sub.to_parent[local.gauge_vertex];
  for (int e : local.inlier_edges) out.inlier_edges.push_back(sub.edge_to_parent[e]);
  std::sort(out.inlier_edges.begin(), out.inlier_edges.end());
  out.trace = local.trace;
  for (TraceRecord& rec : out.trace) {
    rec.chosen_vertex = sub.to_parent[rec.chosen_vertex];
    rec.anchor_vertex = sub.to_parent[rec.anchor_vertex];
  }
  out.connected = out.dominating = IsConnectedDominating(g, out.members);
  return out;
}

std::vector<VertexId> BruteForceMinCds(const EpipolarGraph& g) {
  const int n = g.NumVertices();
  if (n > kBruteForceCdsLimit) {
    throw TooLarge("brute-force CDS search is limited to " +
                   std::to_string(kBruteForceCdsLimit) + " vertices");
  }
  if (n == 0) return {};
  for (int k = 1; k <= n; ++k) {
    // Combinations of size k in lexicographic order.
    std::vector<VertexId> subset(k);
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
      if (IsConnectedDominating(g, subset)) return subset;
      int pos = k - 1;
      while (pos >= 0 && subset[pos] == n - k + pos) --pos;
      if (pos < 0) break;
      ++subset[pos];
      for (int q = pos + 1; q < k; ++q) subset[q] = subset[q - 1] + 1;
    }
  }
  throw std::invalid_argument("brute-force CDS needs a connected graph");
}

}  // namespace rotavg
