// SPDX-License-Identifier: Apache-2.0
//
// Continuous Lagrange DOF numbering: vertex DOFs first, then (p-1) per edge
// ordered from the lower to the higher vertex index, then element interiors.

#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "ddlab/lagrange.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/mesh.hpp"

namespace ddlab {

using Dof = Index;

class DofMap {
 public:
  DofMap(const Mesh& mesh, int order);

  int order() const { return order_; }
  Dof num_dofs() const { return num_dofs_; }
  int dofs_per_element() const { return basis_.num_nodes(); }
  const LagrangeTriangle& basis() const { return basis_; }

  /// Global DOFs of triangle t in local node order.
  std::span<const Dof> element(Element t) const;
  /// The p+1 DOFs of an edge ordered from edges()[e].v0 to v1.
  std::vector<Dof> edge_dofs(EdgeId e) const;
  const Point& coordinate(Dof d) const { return coords_[d]; }

 private:
  int order_;
  LagrangeTriangle basis_;
  const Mesh* mesh_;
  Dof num_dofs_ = 0;
  std::vector<Dof> element_dofs_;
  std::vector<Point> coords_;
};

DofMap build_dofmap(const Mesh& mesh, int order);

/// Local <-> global numbering of the DOFs touched by a set of elements.
struct SubdomainDofs {
  std::vector<Dof> local_to_global;  // ascending
  std::vector<Index> global_to_local;  // -1 when absent

  Index size() const { return static_cast<Index>(local_to_global.size()); }
  Index local(Dof g) const { return global_to_local[g]; }
};

SubdomainDofs subdomain_dofs(const DofMap& dofs, std::span<const Element> elements);

/// DOFs lying on a set of edges, sorted by (x, y) then global index.
std::vector<Dof> edge_set_dofs(const DofMap& dofs, std::span<const EdgeId> edges);

/// Canonical interface DOF lists per ordered neighbor pair; (i,j) and (j,i)
/// are identical lists.
std::map<std::pair<int, int>, std::vector<Dof>> extract_interfaces(const Partition& p, const DofMap& dofs);

/// Owning subdomain of each DOF: lowest label among incident elements.
std::vector<int> dof_owners(const Partition& p, const DofMap& dofs, const Mesh& mesh);

}  // namespace ddlab
