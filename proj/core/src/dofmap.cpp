// SPDX-License-Identifier: Apache-2.0

#include "ddlab/dofmap.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ddlab {

DofMap::DofMap(const Mesh& mesh, int order) : order_(order), basis_(order), mesh_(&mesh) {
  const int p = order;
  const Dof nv = mesh.num_vertices();
  const Dof ne = static_cast<Dof>(mesh.edges().size());
  const int interior = (p - 1) * (p - 2) / 2;
  num_dofs_ = nv + ne * (p - 1) + mesh.num_triangles() * interior;
  const int nloc = basis_.num_nodes();
  element_dofs_.resize(static_cast<std::size_t>(mesh.num_triangles()) * nloc);
  coords_.resize(static_cast<std::size_t>(num_dofs_));

  for (Vertex v = 0; v < nv; ++v) coords_[v] = mesh.vertices()[v];
  for (EdgeId e = 0; e < ne; ++e) {
    const Point& a = mesh.vertices()[mesh.edges()[e].v0];
    const Point& b = mesh.vertices()[mesh.edges()[e].v1];
    for (int k = 1; k < p; ++k) {
      const double t = static_cast<double>(k) / p;
      coords_[nv + e * (p - 1) + (k - 1)] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
  }

  for (Element t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    Dof* out = element_dofs_.data() + t * nloc;
    int n = 0;
    for (int v = 0; v < 3; ++v) out[n++] = tri[v];
    for (int le = 0; le < 3; ++le) {
      const Vertex a = tri[le];
      const EdgeId e = mesh.triangle_edges(t)[le];
      const bool forward = a == mesh.edges()[e].v0;
      for (int k = 1; k < p; ++k) out[n++] = nv + e * (p - 1) + (forward ? k - 1 : p - 1 - k);
    }
    for (int k = 0; k < interior; ++k) {
      const Dof d = nv + ne * (p - 1) + t * interior + k;
      out[n++] = d;
      const auto& lat = basis_.lattice()[static_cast<std::size_t>(n - 1)];
      Point c;
      for (int m = 0; m < 3; ++m) {
        c.x += lat[m] * mesh.vertices()[tri[m]].x / p;
        c.y += lat[m] * mesh.vertices()[tri[m]].y / p;
      }
      coords_[d] = c;
    }
  }
}

std::span<const Dof> DofMap::element(Element t) const {
  const auto nloc = static_cast<std::size_t>(basis_.num_nodes());
  return {element_dofs_.data() + t * nloc, nloc};
}

std::vector<Dof> DofMap::edge_dofs(EdgeId e) const {
  const auto& edge = mesh_->edges()[e];
  std::vector<Dof> out;
  out.reserve(static_cast<std::size_t>(order_) + 1);
  out.push_back(edge.v0);
  for (int k = 1; k < order_; ++k) out.push_back(mesh_->num_vertices() + e * (order_ - 1) + (k - 1));
  out.push_back(edge.v1);
  return out;
}

DofMap build_dofmap(const Mesh& mesh, int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("build_dofmap: unsupported order");
  return DofMap(mesh, order);
}

SubdomainDofs subdomain_dofs(const DofMap& dofs, std::span<const Element> elements) {
  SubdomainDofs s;
  s.global_to_local.assign(static_cast<std::size_t>(dofs.num_dofs()), -1);
  for (const Element t : elements)
    for (const Dof d : dofs.element(t)) s.global_to_local[d] = 0;
  for (Dof d = 0; d < dofs.num_dofs(); ++d) {
    if (s.global_to_local[d] == 0) {
      s.global_to_local[d] = static_cast<Index>(s.local_to_global.size());
      s.local_to_global.push_back(d);
    }
  }
  return s;
}

std::vector<Dof> edge_set_dofs(const DofMap& dofs, std::span<const EdgeId> edges) {
  std::vector<Dof> out;
  for (const EdgeId e : edges) {
    const auto ed = dofs.edge_dofs(e);
    out.insert(out.end(), ed.begin(), ed.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::sort(out.begin(), out.end(), [&](Dof a, Dof b) {
    const Point& pa = dofs.coordinate(a);
    const Point& pb = dofs.coordinate(b);
    if (pa.x != pb.x) return pa.x < pb.x;
    if (pa.y != pb.y) return pa.y < pb.y;
    return a < b;
  });
  return out;
}

std::map<std::pair<int, int>, std::vector<Dof>> extract_interfaces(const Partition& p, const DofMap& dofs) {
  std::map<std::pair<int, int>, std::vector<Dof>> out;
  for (const auto& [key, edges] : p.interfaces()) out[key] = edge_set_dofs(dofs, edges);
  return out;
}

std::vector<int> dof_owners(const Partition& p, const DofMap& dofs, const Mesh& mesh) {
  std::vector<int> owner(static_cast<std::size_t>(dofs.num_dofs()), std::numeric_limits<int>::max());
  for (Element t = 0; t < mesh.num_triangles(); ++t)
    for (const Dof d : dofs.element(t)) owner[d] = std::min(owner[d], p.subdomain_of(t));
  return owner;
}

}  // namespace ddlab
