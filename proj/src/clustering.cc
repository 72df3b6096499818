#include "rotavg/clustering.h"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>

#include <glog/logging.h>

#include "rotavg/errors.h"

namespace rotavg {

namespace {

// Weighted graph of one Louvain level. `self[i]` is the internal weight of
// node i counted as in a degree sum.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> self;
  std::vector<double> degree;
  double m2 = 0.0;

  int size() const { return static_cast<int>(adj.size()); }
};

LevelGraph FromEpipolarGraph(const EpipolarGraph& g) {
  LevelGraph lg;
  const int n = g.NumVertices();
  lg.adj.resize(n);
  lg.self.assign(n, 0.0);
  lg.degree.assign(n, 0.0);
  for (VertexId v = 0; v < n; ++v) {
    for (const Neighbor& nb : g.Neighbors(v)) lg.adj[v].push_back({nb.vertex, 1.0});
    lg.degree[v] = static_cast<double>(lg.adj[v].size());
    lg.m2 += lg.degree[v];
  }
  return lg;
}

// Local moving phase. Returns true if any node changed community.
bool MoveNodes(const LevelGraph& lg, double resolution, std::vector<int>& comm) {
  const int n = lg.size();
  std::vector<double> tot(n, 0.0);
  for (int i = 0; i < n; ++i) tot[comm[i]] += lg.degree[i];
  std::vector<double> weight_to(n, 0.0);
  std::vector<int> touched;
  bool moved_any = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < n; ++i) {
      const int ci = comm[i];
      touched.clear();
      for (const auto& [j, w] : lg.adj[i]) {
        const int cj = comm[j];
        if (weight_to[cj] == 0.0) touched.push_back(cj);
        weight_to[cj] += w;
      }
      tot[ci] -= lg.degree[i];
      const double k = lg.degree[i] / lg.m2;
      int best = ci;
      double best_gain = weight_to[ci] - resolution * tot[ci] * k;
      std::sort(touched.begin(), touched.end());
      for (int c : touched) {
        const double gain = weight_to[c] - resolution * tot[c] * k;
        if (gain > best_gain + 1e-12) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += lg.degree[i];
      comm[i] = best;
      if (best != ci) improved = moved_any = true;
      for (int c : touched) weight_to[c] = 0.0;
    }
  }
  return moved_any;
}

// Renumbers `comm` densely in order of first appearance; returns the count.
int Renumber(std::vector<int>& comm) {
  std::map<int, int> remap;
  for (int& c : comm) {
    auto [it, inserted] = remap.emplace(c, static_cast<int>(remap.size()));
    c = it->second;
  }
  return static_cast<int>(remap.size());
}

LevelGraph Aggregate(const LevelGraph& lg, const std::vector<int>& comm, int count) {
  LevelGraph out;
  out.adj.resize(count);
  out.self.assign(count, 0.0);
  out.degree.assign(count, 0.0);
  out.m2 = lg.m2;
  std::vector<std::map<int, double>> links(count);
  for (int i = 0; i < lg.size(); ++i) {
    out.self[comm[i]] += lg.self[i];
    out.degree[comm[i]] += lg.degree[i];
    for (const auto& [j, w] : lg.adj[i]) {
      if (comm[j] == comm[i]) {
        out.self[comm[i]] += w;
      } else {
        links[comm[i]][comm[j]] += w;
      }
    }
  }
  for (int c = 0; c < count; ++c) {
    out.adj[c].assign(links[c].begin(), links[c].end());
  }
  return out;
}

// Merges `small` communities into their largest adjacent one until `done`.
void MergeCommunities(const EpipolarGraph& g, std::vector<int>& labels,
                      int min_size, int max_communities) {
  while (true) {
    std::map<int, int> sizes;
    for (int c : labels) ++sizes[c];
    // Smallest community first, lowest label on ties, skipping isolated ones.
    std::vector<std::pair<int, int>> order;
    for (const auto& [c, s] : sizes) order.push_back({s, c});
    std::sort(order.begin(), order.end());
    const bool over_count = max_communities > 0 &&
                            static_cast<int>(sizes.size()) > max_communities;
    bool merged = false;
    for (const auto& [size, c] : order) {
      if (sizes.size() <= 1) break;
      if (size >= min_size && !over_count) break;
      int target = -1;
      for (VertexId v = 0; v < g.NumVertices(); ++v) {
        if (labels[v] != c) continue;
        for (const Neighbor& nb : g.Neighbors(v)) {
          const int d = labels[nb.vertex];
          if (d == c) continue;
          if (target < 0 || sizes[d] > sizes[target] ||
              (sizes[d] == sizes[target] && d < target)) {
            target = d;
          }
        }
      }
      if (target < 0) continue;
      for (int& l : labels) {
        if (l == c) l = target;
      }
      merged = true;
      break;
    }
    if (!merged) return;
  }
}

}  // namespace

std::vector<int> DetectCommunities(const EpipolarGraph& g,
                                   const CommunityOptions& options) {
  const int n = g.NumVertices();
  std::vector<int> labels(n);
  for (int v = 0; v < n; ++v) labels[v] = v;
  LevelGraph level = FromEpipolarGraph(g);
  if (level.m2 > 0.0) {
    while (true) {
      std::vector<int> comm(level.size());
      for (int i = 0; i < level.size(); ++i) comm[i] = i;
      const bool moved = MoveNodes(level, options.resolution, comm);
      if (!moved) break;
      const int count = Renumber(comm);
      for (int& l : labels) l = comm[l];
      level = Aggregate(level, comm, count);
    }
  }
  MergeCommunities(g, labels, options.min_size, options.max_communities);

  // Number communities by their smallest member.
  std::map<int, int> remap;
  for (int& l : labels) {
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return labels;
}

double Modularity(const EpipolarGraph& g, const std::vector<int>& labels,
                  double resolution) {
  const double m = g.NumEdges();
  if (m == 0) return 0.0;
  std::map<int, double> internal;
  std::map<int, double> degree;
  for (const auto& e : g.Edges()) {
    if (labels[e.i] == labels[e.j]) internal[labels[e.i]] += 1.0;
  }
  for (VertexId v = 0; v < g.NumVertices(); ++v) degree[labels[v]] += g.Degree(v);
  double q = 0.0;
  for (const auto& [c, d] : degree) {
    q += internal[c] / m - resolution * (d / (2 * m)) * (d / (2 * m));
  }
  return q;
}

std::vector<CommunitySeed> CommunitySeeds(const EpipolarGraph& g,
                                          const CommunityOptions& community_options,
                                          const EngineOptions& options) {
  const std::vector<int> labels = DetectCommunities(g, community_options);
  const int count =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<VertexId>> members(count);
  for (VertexId v = 0; v < g.NumVertices(); ++v) members[labels[v]].push_back(v);

  std::vector<CommunitySeed> seeds;
  for (int c = 0; c < count; ++c) {
    const Subgraph sub = InducedSubgraph(g, members[c]);
    CommunitySeed out;
    try {
      out.seed = SelectSeed(sub.graph, options);
    } catch (const NoValidSeed&) {
      VLOG(1) << "community " << c << " (" << members[c].size()
              << " vertices) has no valid seed; dissolved";
      continue;
    }
    out.community = c;
    out.members = members[c];
    Triplet& t = out.seed.triplet;
    t = {sub.to_parent[t.i], sub.to_parent[t.j], sub.to_parent[t.k]};
    seeds.push_back(std::move(out));
  }
  if (seeds.empty()) {
    throw NoValidSeed("no community contains a triplet passing the chaining check");
  }
  return seeds;
}

ClusterState GrowClusters(const EpipolarGraph& g, const std::vector<SeedResult>& seeds,
                          const EngineOptions& options) {
  const int n = g.NumVertices();
  const int k = static_cast<int>(seeds.size());
  ClusterState out;
  out.assignment.assign(n, -1);
  out.clusters.resize(k);

  std::vector<IncrementalState> states;
  states.reserve(k);
  std::vector<std::set<VertexId>> frontier(k);
  // Cached rewards per cluster, valid while the vertex's anchors and their
  // estimates in that cluster are unchanged.
  std::vector<std::vector<std::optional<CandidateReward>>> cache(
      k, std::vector<std::optional<CandidateReward>>(n));

  auto assign = [&](int c, VertexId v) {
    if (out.assignment[v] >= 0) throw std::invalid_argument("cluster seeds overlap");
    out.assignment[v] = c;
    for (int d = 0; d < k; ++d) {
      frontier[d].erase(v);
      cache[d][v].reset();
    }
  };
  auto extend_frontier = [&](int c, VertexId v) {
    for (const Neighbor& nb : g.Neighbors(v)) {
      if (out.assignment[nb.vertex] >= 0) continue;
      frontier[c].insert(nb.vertex);
      cache[c][nb.vertex].reset();
    }
  };
  for (int c = 0; c < k; ++c) {
    states.emplace_back(n, seeds[c]);
    const Triplet& t = seeds[c].triplet;
    for (VertexId v : {t.i, t.j, t.k}) assign(c, v);
  }
  for (int c = 0; c < k; ++c) {
    for (VertexId v : states[c].SelectionOrder()) extend_frontier(c, v);
  }

  std::vector<int> steps(k, 0);
  std::vector<VertexId> stale;
  while (true) {
    int best_cluster = -1;
    const CandidateReward* best = nullptr;
    for (int c = 0; c < k; ++c) {
      stale.clear();
      for (VertexId v : frontier[c]) {
        if (!cache[c][v]) stale.push_back(v);
      }
      for (CandidateReward& r :
           CandidateRewards(g, states[c], stale, options.theta_th_deg)) {
        cache[c][r.p] = std::move(r);
      }
      for (VertexId v : frontier[c]) {
        const CandidateReward& r = *cache[c][v];
        if (best == nullptr || r.reward > best->reward) {
          best = &r;
          best_cluster = c;
        }
      }
    }
    if (best == nullptr) break;

    const CandidateReward choice = *best;
    const int c = best_cluster;
    const TraceRecord rec = AdmitCandidate(g, states[c], choice, options, ++steps[c]);
    out.clusters[c].trace.push_back(rec);
    assign(c, choice.p);
    if (rec.global_opt) {
      for (auto& entry : cache[c]) entry.reset();
    }
    extend_frontier(c, choice.p);
  }

  if (std::count(out.assignment.begin(), out.assignment.end(), -1) > 0) {
    throw Stalled("unassigned vertices have no edge into any cluster");
  }
  for (int c = 0; c < k; ++c) {
    const GlobalOptResult final_opt = GlobalOptimize(g, states[c], options);
    ClusterFrame& frame = out.clusters[c];
    frame.rotations = states[c].Estimates();
    frame.gauge_vertex = states[c].gauge_vertex();
    frame.selection_order = states[c].SelectionOrder();
    frame.inlier_edges = final_opt.inlier_edges;
    frame.final_report = final_opt.report;
  }
  return out;
}

}  // namespace rotavg
