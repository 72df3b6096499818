#include "rotavg/baseline.h"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "rotavg/engine.h"

namespace rotavg {

std::vector<int> TripletSupport(const EpipolarGraph& g, double theta_th_deg) {
  std::vector<int> support(g.NumEdges(), 0);
  for (const Triplet& t : EnumerateTriplets(g)) {
    if (!ChainingCheck(g, t, theta_th_deg).passes) continue;
    ++support[*g.FindEdge(t.i, t.j)];
    ++support[*g.FindEdge(t.i, t.k)];
    ++support[*g.FindEdge(t.j, t.k)];
  }
  return support;
}

Registration SpanningTreeChaining(const EpipolarGraph& g, double theta_th_deg) {
  const int n = g.NumVertices();
  if (n == 0) return {};
  const std::vector<int> support = TripletSupport(g, theta_th_deg);
  std::vector<int> order(g.NumEdges());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return support[a] > support[b]; });

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<std::vector<std::pair<VertexId, int>>> tree(n);
  for (int e : order) {
    const auto& m = g.Edge(e);
    const int a = find(m.i), b = find(m.j);
    if (a == b) continue;
    parent[a] = b;
    tree[m.i].push_back({m.j, e});
    tree[m.j].push_back({m.i, e});
  }
  for (auto& adj : tree) std::sort(adj.begin(), adj.end());

  Registration out;
  out.emplace(0, Rotation());
  std::queue<VertexId> queue;
  queue.push(0);
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop();
    for (const auto& [w, e] : tree[v]) {
      if (out.contains(w)) continue;
      // R_w = R_{v,w} R_v
      out.emplace(w, g.DirectedMeasurement(e, v) * out.at(v));
      queue.push(w);
    }
  }
  if (static_cast<int>(out.size()) != n) {
    throw std::invalid_argument("spanning-tree chaining needs a connected graph");
  }
  return out;
}

}  // namespace rotavg
