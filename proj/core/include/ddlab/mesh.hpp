// SPDX-License-Identifier: Apache-2.0
//
// Structured-triangulated rectangles, geometric partitions, single-layer
// overlaps and subdomain interface edge sets. The y coordinate is depth
// (positive downward); y = 0 is the surface.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ddlab {

class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Vertex = std::int64_t;
using Element = std::int64_t;
using EdgeId = std::int64_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryTag : std::uint8_t { gamma_inf = 1 };

struct BoundaryEdge {
  Vertex v0;
  Vertex v1;
  BoundaryTag tag;
};

/// Undirected edge; v0 < v1. `triangles[1]` is -1 on the outer boundary.
struct Edge {
  Vertex v0;
  Vertex v1;
  std::array<Element, 2> triangles;
};

class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<Vertex, 3>> triangles, double lx, double ly,
       int grid_nx = 0, int grid_ny = 0);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<Vertex, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Local edge e of a triangle joins local vertices e and (e+1)%3.
  const std::array<EdgeId, 3>& triangle_edges(Element t) const { return triangle_edges_[t]; }
  EdgeId find_edge(Vertex a, Vertex b) const;

  Element num_triangles() const { return static_cast<Element>(triangles_.size()); }
  Vertex num_vertices() const { return static_cast<Vertex>(vertices_.size()); }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  int grid_nx() const { return grid_nx_; }
  int grid_ny() const { return grid_ny_; }

  double signed_area(Element t) const;
  Point centroid(Element t) const;
  bool is_boundary_edge(EdgeId e) const { return edges_[e].triangles[1] < 0; }
  /// Triangles incident to each vertex.
  const std::vector<std::vector<Element>>& vertex_triangles() const { return vertex_triangles_; }

  /// Plain-text export: vertex, triangle and boundary-edge records.
  void write_text(std::ostream& out) const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<Vertex, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Edge> edges_;
  std::vector<std::array<EdgeId, 3>> triangle_edges_;
  std::vector<std::vector<Element>> vertex_triangles_;
  std::map<std::pair<Vertex, Vertex>, EdgeId> edge_lookup_;
  double lx_;
  double ly_;
  int grid_nx_;
  int grid_ny_;
};

/// Uniform nx-by-ny grid on [0,lx]x[0,ly], each cell split along one diagonal.
Mesh generate_rect_mesh(int nx, int ny, double lx, double ly);

enum class Axis { x, y };

/// Element labels plus shared edges between edge-adjacent subdomains.
class Partition {
 public:
  Partition(const Mesh& mesh, std::vector<int> subdomain_of, int count);

  int count() const { return count_; }
  int subdomain_of(Element t) const { return subdomain_of_[t]; }
  const std::vector<int>& labels() const { return subdomain_of_; }
  /// Keyed by ordered pair; (i,j) and (j,i) hold the same edges.
  const std::map<std::pair<int, int>, std::vector<EdgeId>>& interfaces() const { return interfaces_; }
  std::vector<int> neighbors(int i) const;
  std::vector<Element> elements_of(int i) const;

 private:
  std::vector<int> subdomain_of_;
  int count_;
  std::map<std::pair<int, int>, std::vector<EdgeId>> interfaces_;
};

/// Equal-width strips by centroid coordinate.
Partition partition_strips(const Mesh& mesh, int n, Axis axis);
/// nx-by-ny blocks by centroid.
Partition partition_grid(const Mesh& mesh, int nx, int ny);

/// Owned elements of each subdomain grown by one node-connected layer.
class OverlapPartition {
 public:
  OverlapPartition(const Mesh& mesh, Partition base);

  const Partition& base() const { return base_; }
  int count() const { return base_.count(); }
  const std::vector<Element>& extended_elements(int i) const { return extended_[i]; }
  /// Rim edges of the extended set that are not on the outer boundary.
  const std::vector<EdgeId>& artificial_boundary(int i) const { return artificial_[i]; }
  /// Owned sets recovered from the labels of the base partition.
  std::vector<Element> owned_elements(int i) const { return base_.elements_of(i); }

 private:
  Partition base_;
  std::vector<std::vector<Element>> extended_;
  std::vector<std::vector<EdgeId>> artificial_;
};

OverlapPartition grow_overlap(const Mesh& mesh, const Partition& p);

/// True when the elements of subdomain i form one edge-connected component.
bool is_edge_connected(const Mesh& mesh, const Partition& p, int i);

}  // namespace ddlab
