#include "rotavg/graph.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rotavg/errors.h"

namespace rotavg {

EpipolarGraph::EpipolarGraph(int num_vertices) { EnsureVertices(num_vertices); }

void EpipolarGraph::EnsureVertices(int num_vertices) {
  if (num_vertices > NumVertices()) {
    adjacency_.resize(num_vertices);
  }
}

std::optional<int> EpipolarGraph::FindEdge(VertexId a, VertexId b) const {
  if (a < 0 || b < 0 || a >= NumVertices() || b >= NumVertices()) {
    return std::nullopt;
  }
  const auto& adj = adjacency_[a];
  auto it = std::lower_bound(
      adj.begin(), adj.end(), b,
      [](const Neighbor& n, VertexId v) { return n.vertex < v; });
  if (it != adj.end() && it->vertex == b) {
    return it->edge;
  }
  return std::nullopt;
}

const Rotation& EpipolarGraph::Measurement(VertexId from, VertexId to) const {
  const auto e = FindEdge(from, to);
  if (!e) {
    throw std::out_of_range("no edge between " + std::to_string(from) +
                            " and " + std::to_string(to));
  }
  return DirectedMeasurement(*e, from);
}

int EpipolarGraph::AddEdge(VertexId i, VertexId j, const Rotation& r_ij) {
  if (i < 0 || j < 0) {
    throw std::invalid_argument("negative vertex id");
  }
  if (i == j) {
    throw std::invalid_argument("self loop on vertex " + std::to_string(i));
  }
  EnsureVertices(std::max(i, j) + 1);
  if (HasEdge(i, j)) {
    throw DuplicateEdge("edge (" + std::to_string(std::min(i, j)) + ", " +
                        std::to_string(std::max(i, j)) + ") listed twice");
  }
  RelativeMeasurement m;
  if (i < j) {
    m = {i, j, r_ij};
  } else {
    m = {j, i, r_ij.Inverse()};
  }
  const int e = NumEdges();
  edges_.push_back(m);
  inverse_.push_back(m.rot.Inverse());

  auto insert = [this](VertexId v, Neighbor n) {
    auto& adj = adjacency_[v];
    auto it = std::lower_bound(
        adj.begin(), adj.end(), n.vertex,
        [](const Neighbor& a, VertexId b) { return a.vertex < b; });
    adj.insert(it, n);
  };
  insert(m.i, {m.j, e});
  insert(m.j, {m.i, e});
  return e;
}

Subgraph InducedSubgraph(const EpipolarGraph& g,
                         std::span<const VertexId> vertices) {
  Subgraph sub;
  sub.to_parent.assign(vertices.begin(), vertices.end());
  std::sort(sub.to_parent.begin(), sub.to_parent.end());
  sub.to_parent.erase(std::unique(sub.to_parent.begin(), sub.to_parent.end()),
                      sub.to_parent.end());
  sub.from_parent.assign(g.NumVertices(), -1);
  for (size_t k = 0; k < sub.to_parent.size(); ++k) {
    sub.from_parent[sub.to_parent[k]] = static_cast<VertexId>(k);
  }
  sub.graph = EpipolarGraph(static_cast<int>(sub.to_parent.size()));
  for (int e = 0; e < g.NumEdges(); ++e) {
    const auto& m = g.Edge(e);
    const VertexId a = sub.from_parent[m.i];
    const VertexId b = sub.from_parent[m.j];
    if (a >= 0 && b >= 0) {
      sub.graph.AddEdge(a, b, m.rot);
      sub.edge_to_parent.push_back(e);
    }
  }
  return sub;
}

std::vector<Triplet> EnumerateTriplets(const EpipolarGraph& g) {
  std::vector<Triplet> out;
  std::vector<VertexId> common;
  for (VertexId i = 0; i < g.NumVertices(); ++i) {
    const auto ni = g.Neighbors(i);
    for (const Neighbor& nj : ni) {
      const VertexId j = nj.vertex;
      if (j <= i) continue;
      const auto nbj = g.Neighbors(j);
      // Intersect the sorted lists, keeping k > j.
      auto a = ni.begin();
      auto b = nbj.begin();
      while (a != ni.end() && b != nbj.end()) {
        if (a->vertex < b->vertex) {
          ++a;
        } else if (b->vertex < a->vertex) {
          ++b;
        } else {
          if (a->vertex > j) {
            out.push_back({i, j, a->vertex});
          }
          ++a;
          ++b;
        }
      }
    }
  }
  return out;
}

std::vector<std::vector<VertexId>> ConnectedComponents(const EpipolarGraph& g) {
  const int n = g.NumVertices();
  std::vector<int> label(n, -1);
  std::vector<std::vector<VertexId>> comps;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    const int c = static_cast<int>(comps.size());
    comps.emplace_back();
    label[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      comps[c].push_back(v);
      for (const Neighbor& nb : g.Neighbors(v)) {
        if (label[nb.vertex] < 0) {
          label[nb.vertex] = c;
          stack.push_back(nb.vertex);
        }
      }
    }
    std::sort(comps[c].begin(), comps[c].end());
  }
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

std::vector<VertexId> LargestComponent(const EpipolarGraph& g) {
  auto comps = ConnectedComponents(g);
  if (comps.empty()) return {};
  return std::move(comps.front());
}

bool IsConnected(const EpipolarGraph& g) {
  return ConnectedComponents(g).size() <= 1;
}

namespace {

Rotation ParseQuaternion(int line_no, double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || std::abs(n - 1.0) > kQuaternionNormTolerance) {
    std::ostringstream msg;
    msg << "line " << line_no << ": quaternion norm " << n
        << " deviates from 1 by more than " << kQuaternionNormTolerance;
    throw NonUnitQuaternion(msg.str());
  }
  return Rotation::FromQuaternion(w, x, y, z);
}

bool IsSkippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

void WriteQuaternion(std::ostream& out, const Rotation& r) {
  out << r.w() << ' ' << r.x() << ' ' << r.y() << ' ' << r.z();
}

std::ifstream OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  return in;
}

std::ofstream OpenForWrite(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  return out;
}

}  // namespace

EpipolarGraph LoadGraph(std::istream& in) {
  EpipolarGraph g;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsSkippable(line)) continue;
    std::istringstream ss(line);
    std::string tag;
    long long i = 0, j = 0;
    double w, x, y, z;
    ss >> tag;
    if (tag != "e") {
      throw ParseError(line_no, "unknown record type '" + tag + "'");
    }
    if (!(ss >> i >> j >> w >> x >> y >> z)) {
      throw ParseError(line_no, "expected 'e <i> <j> <qw> <qx> <qy> <qz>'");
    }
    std::string rest;
    if (ss >> rest) {
      throw ParseError(line_no, "trailing token '" + rest + "'");
    }
    if (i < 0 || j < 0 || i > INT32_MAX || j > INT32_MAX) {
      throw ParseError(line_no, "vertex id out of range");
    }
    if (i == j) {
      throw ParseError(line_no, "self loop");
    }
    g.AddEdge(static_cast<VertexId>(i), static_cast<VertexId>(j),
              ParseQuaternion(line_no, w, x, y, z));
  }
  return g;
}

EpipolarGraph LoadGraphFile(const std::string& path) {
  auto in = OpenForRead(path);
  return LoadGraph(in);
}

void SaveGraph(const EpipolarGraph& g, std::ostream& out) {
  const auto old_precision = out.precision(17);
  for (const auto& m : g.Edges()) {
    out << "e " << m.i << ' ' << m.j << ' ';
    WriteQuaternion(out, m.rot);
    out << '\n';
  }
  out.precision(old_precision);
}

void SaveGraphFile(const EpipolarGraph& g, const std::string& path) {
  auto out = OpenForWrite(path);
  SaveGraph(g, out);
}

Registration LoadRegistration(std::istream& in) {
  Registration reg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsSkippable(line)) continue;
    std::istringstream ss(line);
    std::string tag;
    long long i = 0;
    double w, x, y, z;
    ss >> tag;
    if (tag != "v") {
      throw ParseError(line_no, "unknown record type '" + tag + "'");
    }
    if (!(ss >> i >> w >> x >> y >> z)) {
      throw ParseError(line_no, "expected 'v <i> <qw> <qx> <qy> <qz>'");
    }
    std::string rest;
    if (ss >> rest) {
      throw ParseError(line_no, "trailing token '" + rest + "'");
    }
    if (i < 0 || i > INT32_MAX) {
      throw ParseError(line_no, "vertex id out of range");
    }
    if (!reg.emplace(static_cast<VertexId>(i), ParseQuaternion(line_no, w, x, y, z))
             .second) {
      throw ParseError(line_no, "vertex " + std::to_string(i) + " listed twice");
    }
  }
  return reg;
}

Registration LoadRegistrationFile(const std::string& path) {
  auto in = OpenForRead(path);
  return LoadRegistration(in);
}

void SaveRegistration(const Registration& reg, std::ostream& out) {
  const auto old_precision = out.precision(17);
  for (const auto& [v, r] : reg) {
    out << "v " << v << ' ';
    WriteQuaternion(out, r);
    out << '\n';
  }
  out.precision(old_precision);
}

void SaveRegistrationFile(const Registration& reg, const std::string& path) {
  auto out = OpenForWrite(path);
  SaveRegistration(reg, out);
}

}  // namespace rotavg
