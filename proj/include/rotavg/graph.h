#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotavg/so3.h"

namespace rotavg {

using VertexId = int32_t;

// Partial map vertex -> absolute rotation (world-to-camera) in one frame.
using Registration = std::map<VertexId, Rotation>;

// Relative rotation R_{i,j} with the convention R_j = R_{i,j} * R_i.
// Stored with i < j.
struct RelativeMeasurement {
  VertexId i = 0;
  VertexId j = 0;
  Rotation rot;
};

struct Triplet {
  VertexId i = 0;
  VertexId j = 0;
  VertexId k = 0;

  auto operator<=>(const Triplet&) const = default;
};

struct Neighbor {
  VertexId vertex = 0;
  int edge = 0;
};

// Undirected simple graph of relative rotations over vertices [0, n).
class EpipolarGraph {
 public:
  EpipolarGraph() = default;
  explicit EpipolarGraph(int num_vertices);

  // Grows the vertex range if needed. (j, i) input is stored as (i, j) with
  // the inverted rotation. Returns the edge index. Throws DuplicateEdge,
  // std::invalid_argument on self loops or negative ids.
  int AddEdge(VertexId i, VertexId j, const Rotation& r_ij);

  void EnsureVertices(int num_vertices);

  int NumVertices() const { return static_cast<int>(adjacency_.size()); }
  int NumEdges() const { return static_cast<int>(edges_.size()); }

  const RelativeMeasurement& Edge(int e) const { return edges_[e]; }
  const std::vector<RelativeMeasurement>& Edges() const { return edges_; }

  // Sorted by neighbor id.
  std::span<const Neighbor> Neighbors(VertexId v) const { return adjacency_[v]; }
  int Degree(VertexId v) const { return static_cast<int>(adjacency_[v].size()); }

  std::optional<int> FindEdge(VertexId a, VertexId b) const;
  bool HasEdge(VertexId a, VertexId b) const { return FindEdge(a, b).has_value(); }

  // R_{from,to} such that R_to = R_{from,to} * R_from.
  const Rotation& DirectedMeasurement(int edge, VertexId from) const {
    return edges_[edge].i == from ? edges_[edge].rot : inverse_[edge];
  }

  // Throws std::out_of_range if the pair is not an edge.
  const Rotation& Measurement(VertexId from, VertexId to) const;

 private:
  std::vector<RelativeMeasurement> edges_;
  std::vector<Rotation> inverse_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Vertex-induced subgraph with dense re-indexing.
struct Subgraph {
  EpipolarGraph graph;
  std::vector<VertexId> to_parent;  // local vertex -> parent vertex
  std::vector<int> edge_to_parent;  // local edge -> parent edge
  std::vector<VertexId> from_parent;  // parent vertex -> local vertex or -1
};

Subgraph InducedSubgraph(const EpipolarGraph& g, std::span<const VertexId> vertices);

// Every 3-clique once, sorted lexicographically.
std::vector<Triplet> EnumerateTriplets(const EpipolarGraph& g);

// Components sorted by decreasing size, then by smallest member. Each
// component is sorted ascending.
std::vector<std::vector<VertexId>> ConnectedComponents(const EpipolarGraph& g);

std::vector<VertexId> LargestComponent(const EpipolarGraph& g);

bool IsConnected(const EpipolarGraph& g);

// Edge file: `e <i> <j> <qw> <qx> <qy> <qz>` records, `#` comments.
EpipolarGraph LoadGraph(std::istream& in);
EpipolarGraph LoadGraphFile(const std::string& path);
void SaveGraph(const EpipolarGraph& g, std::ostream& out);
void SaveGraphFile(const EpipolarGraph& g, const std::string& path);

// Absolute rotation file: `v <i> <qw> <qx> <qy> <qz>` records.
Registration LoadRegistration(std::istream& in);
Registration LoadRegistrationFile(const std::string& path);
void SaveRegistration(const Registration& reg, std::ostream& out);
void SaveRegistrationFile(const Registration& reg, const std::string& path);

// Renormalization tolerance for quaternions read from text.
inline constexpr double kQuaternionNormTolerance = 1e-3;

}  // namespace rotavg
