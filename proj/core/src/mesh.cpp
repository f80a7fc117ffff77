// SPDX-License-Identifier: Apache-2.0

#include "ddlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <sstream>

namespace ddlab {

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<Vertex, 3>> triangles, double lx, double ly,
           int grid_nx, int grid_ny)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      lx_(lx),
      ly_(ly),
      grid_nx_(grid_nx),
      grid_ny_(grid_ny) {
  triangle_edges_.resize(triangles_.size());
  vertex_triangles_.resize(vertices_.size());
  for (Element t = 0; t < num_triangles(); ++t) {
    if (!(signed_area(t) > 0.0)) {
      std::ostringstream msg;
      msg << "Mesh: triangle " << t << " is degenerate or clockwise";
      throw MeshError(msg.str());
    }
    for (int e = 0; e < 3; ++e) {
      const Vertex a = triangles_[t][e];
      const Vertex b = triangles_[t][(e + 1) % 3];
      vertex_triangles_[a].push_back(t);
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_lookup_.try_emplace({key.first, key.second}, static_cast<EdgeId>(edges_.size()));
      if (inserted) {
        edges_.push_back({key.first, key.second, {t, -1}});
      } else {
        auto& edge = edges_[it->second];
        if (edge.triangles[1] >= 0) throw MeshError("Mesh: edge shared by more than two triangles");
        edge.triangles[1] = t;
      }
      triangle_edges_[t][e] = it->second;
    }
  }
  for (const auto& edge : edges_) {
    if (edge.triangles[1] < 0) boundary_edges_.push_back({edge.v0, edge.v1, BoundaryTag::gamma_inf});
  }
}

EdgeId Mesh::find_edge(Vertex a, Vertex b) const {
  const auto key = std::minmax(a, b);
  const auto it = edge_lookup_.find({key.first, key.second});
  return it == edge_lookup_.end() ? -1 : it->second;
}

double Mesh::signed_area(Element t) const {
  const auto& tri = triangles_[t];
  const Point& p0 = vertices_[tri[0]];
  const Point& p1 = vertices_[tri[1]];
  const Point& p2 = vertices_[tri[2]];
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

Point Mesh::centroid(Element t) const {
  const auto& tri = triangles_[t];
  Point c;
  for (const Vertex v : tri) {
    c.x += vertices_[v].x / 3.0;
    c.y += vertices_[v].y / 3.0;
  }
  return c;
}

void Mesh::write_text(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "vertices " << vertices_.size() << '\n';
  for (std::size_t i = 0; i < vertices_.size(); ++i) out << i << ' ' << vertices_[i].x << ' ' << vertices_[i].y << '\n';
  out << "triangles " << triangles_.size() << '\n';
  for (std::size_t i = 0; i < triangles_.size(); ++i)
    out << i << ' ' << triangles_[i][0] << ' ' << triangles_[i][1] << ' ' << triangles_[i][2] << '\n';
  out << "boundary_edges " << boundary_edges_.size() << '\n';
  for (std::size_t i = 0; i < boundary_edges_.size(); ++i)
    out << i << ' ' << boundary_edges_[i].v0 << ' ' << boundary_edges_[i].v1 << " gamma_inf\n";
  out.precision(old);
}

Mesh generate_rect_mesh(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1) throw MeshError("generate_rect_mesh: cell counts must be >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) throw MeshError("generate_rect_mesh: extents must be positive");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) vertices.push_back({lx * i / nx, ly * j / ny});
  std::vector<std::array<Vertex, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  const auto id = [nx](int i, int j) { return static_cast<Vertex>(j) * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vertex a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      triangles.push_back({a, b, c});
      triangles.push_back({a, c, d});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles), lx, ly, nx, ny);
}

// ---------------------------------------------------------------------------

Partition::Partition(const Mesh& mesh, std::vector<int> subdomain_of, int count)
    : subdomain_of_(std::move(subdomain_of)), count_(count) {
  if (static_cast<Element>(subdomain_of_.size()) != mesh.num_triangles())
    throw MeshError("Partition: one label per triangle required");
  for (const int s : subdomain_of_)
    if (s < 0 || s >= count_) throw MeshError("Partition: label out of range");
  const auto& edges = mesh.edges();
  for (EdgeId e = 0; e < static_cast<EdgeId>(edges.size()); ++e) {
    const auto [t0, t1] = edges[e].triangles;
    if (t1 < 0) continue;
    const int a = subdomain_of_[t0];
    const int b = subdomain_of_[t1];
    if (a == b) continue;
    interfaces_[{a, b}].push_back(e);
    interfaces_[{b, a}].push_back(e);
  }
}

std::vector<int> Partition::neighbors(int i) const {
  std::vector<int> out;
  for (const auto& [key, edges] : interfaces_)
    if (key.first == i) out.push_back(key.second);
  return out;
}

std::vector<Element> Partition::elements_of(int i) const {
  std::vector<Element> out;
  for (Element t = 0; t < static_cast<Element>(subdomain_of_.size()); ++t)
    if (subdomain_of_[t] == i) out.push_back(t);
  return out;
}

namespace {

int bucket(double coord, double extent, int n) {
  const int b = static_cast<int>(std::floor(coord / (extent / n)));
  return std::clamp(b, 0, n - 1);
}

int cells_along(const Mesh& mesh, Axis axis) {
  return axis == Axis::x ? mesh.grid_nx() : mesh.grid_ny();
}

}  // namespace

Partition partition_strips(const Mesh& mesh, int n, Axis axis) {
  if (n < 1) throw MeshError("partition_strips: need at least one subdomain");
  if (mesh.num_triangles() == 0) throw MeshError("partition_strips: empty mesh");
  const int cells = cells_along(mesh, axis);
  if (cells > 0 && n > cells) throw MeshError("partition_strips: more strips than cells along the axis");
  std::vector<int> labels(static_cast<std::size_t>(mesh.num_triangles()));
  for (Element t = 0; t < mesh.num_triangles(); ++t) {
    const Point c = mesh.centroid(t);
    labels[t] = axis == Axis::x ? bucket(c.x, mesh.lx(), n) : bucket(c.y, mesh.ly(), n);
  }
  return Partition(mesh, std::move(labels), n);
}

Partition partition_grid(const Mesh& mesh, int nx, int ny) {
  if (nx < 1 || ny < 1) throw MeshError("partition_grid: need at least one block per direction");
  if (mesh.num_triangles() == 0) throw MeshError("partition_grid: empty mesh");
  if ((mesh.grid_nx() > 0 && nx > mesh.grid_nx()) || (mesh.grid_ny() > 0 && ny > mesh.grid_ny()))
    throw MeshError("partition_grid: more blocks than cells along an axis");
  std::vector<int> labels(static_cast<std::size_t>(mesh.num_triangles()));
  for (Element t = 0; t < mesh.num_triangles(); ++t) {
    const Point c = mesh.centroid(t);
    labels[t] = bucket(c.y, mesh.ly(), ny) * nx + bucket(c.x, mesh.lx(), nx);
  }
  return Partition(mesh, std::move(labels), nx * ny);
}

// ---------------------------------------------------------------------------

OverlapPartition::OverlapPartition(const Mesh& mesh, Partition base) : base_(std::move(base)) {
  const int n = base_.count();
  extended_.resize(n);
  artificial_.resize(n);
  const auto& vt = mesh.vertex_triangles();
  for (int i = 0; i < n; ++i) {
    std::vector<char> in(static_cast<std::size_t>(mesh.num_triangles()), 0);
    for (Element t = 0; t < mesh.num_triangles(); ++t) {
      if (base_.subdomain_of(t) != i) continue;
      for (const Vertex v : mesh.triangles()[t])
        for (const Element s : vt[v]) in[s] = 1;
    }
    for (Element t = 0; t < mesh.num_triangles(); ++t)
      if (in[t]) extended_[i].push_back(t);
    const auto& edges = mesh.edges();
    for (EdgeId e = 0; e < static_cast<EdgeId>(edges.size()); ++e) {
      const auto [t0, t1] = edges[e].triangles;
      if (t1 < 0) continue;
      if (in[t0] != in[t1]) artificial_[i].push_back(e);
    }
  }
}

OverlapPartition grow_overlap(const Mesh& mesh, const Partition& p) { return OverlapPartition(mesh, p); }

bool is_edge_connected(const Mesh& mesh, const Partition& p, int i) {
  const auto elements = p.elements_of(i);
  if (elements.empty()) return false;
  std::vector<char> seen(static_cast<std::size_t>(mesh.num_triangles()), 0);
  std::deque<Element> queue{elements.front()};
  seen[elements.front()] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const Element t = queue.front();
    queue.pop_front();
    ++reached;
    for (const EdgeId e : mesh.triangle_edges(t)) {
      for (const Element s : mesh.edges()[e].triangles) {
        if (s < 0 || seen[s] || p.subdomain_of(s) != i) continue;
        seen[s] = 1;
        queue.push_back(s);
      }
    }
  }
  return reached == elements.size();
}

}  // namespace ddlab
