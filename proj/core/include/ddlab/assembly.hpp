// SPDX-License-Identifier: Apache-2.0
//
// Galerkin assembly of the Helmholtz operator A = K - M_{k^2} - i M_{Gamma,k},
// point-source loads, interface transmission operators and the local
// subdomain matrices of the overlapping and non-overlapping solvers.

#pragma once

#include <span>
#include <vector>

#include "ddlab/dofmap.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/mesh.hpp"
#include "ddlab/model.hpp"

namespace ddlab {

/// S u = i k alpha_hat u + beta_hat / (i k) Lap_Sigma u.
struct TransmissionParams {
  int order = 0;  // 0 or 2
  Complex alpha_hat{1.0, 0.0};
  Complex beta_hat{0.0, 0.0};

  static TransmissionParams zeroth(Complex alpha_hat = 1.0) { return {0, alpha_hat, 0.0}; }
  static TransmissionParams second(Complex alpha_hat, Complex beta_hat) { return {2, alpha_hat, beta_hat}; }

  /// Throws std::invalid_argument on a bad order, a nonzero beta_hat at
  /// order 0, or Re(alpha_hat) < 0.
  void validate() const;
};

struct AssembledProblem {
  CsrMatrix a;     // complex symmetric Helmholtz matrix
  CsrMatrix mass;  // unweighted mass, for L2 norms
  MultiVector sources;
};

/// Volume terms plus Robin terms on every Gamma_inf edge of the given
/// elements, numbered by `local`.
CsrMatrix assemble_volume(const Mesh& mesh, const DofMap& dofs, const WavenumberField& k,
                          std::span<const Element> elements, const SubdomainDofs& local);

/// Global A and M; `sources` is left empty.
AssembledProblem assemble_global(const Mesh& mesh, const DofMap& dofs, const WavenumberField& k);

CsrMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs);

/// Load phi_j(x_s). Throws std::invalid_argument when x_s is outside the mesh.
MultiVector assemble_point_source(const Mesh& mesh, const DofMap& dofs, const Point& xs);
/// One column per source position.
MultiVector assemble_point_sources(const Mesh& mesh, const DofMap& dofs, std::span<const Point> positions);

/// Containing triangle and barycentric coordinates, or -1 when outside.
Element locate(const Mesh& mesh, const Point& p, std::array<double, 3>& barycentric);

/// Operators on a set of interface edges, in the numbering of `dofs`.
struct InterfaceOperator {
  std::vector<Dof> dofs;  // canonical order (edge_set_dofs)
  CsrMatrix s_mat;        // i alpha_hat M_{Sigma,k} - beta_hat K_{Sigma,1/(ik)}
  CsrMatrix mass;         // unweighted M_Sigma
};

InterfaceOperator assemble_interface_operator(const Mesh& mesh, const DofMap& dofs, std::span<const EdgeId> edges,
                                              const WavenumberField& k, const TransmissionParams& params);

struct LocalMatrix {
  SubdomainDofs dofs;
  CsrMatrix a;
};

/// Extended subdomain i with the transmission operator on its artificial boundary.
LocalMatrix assemble_local_oras(const Mesh& mesh, const DofMap& dofs, const OverlapPartition& overlap, int i,
                                const WavenumberField& k, const TransmissionParams& params);

/// Incoming trace g_ji enters subdomain i as the load M_Sigma g_ji on `local_index`.
struct Coupling {
  int neighbor;
  std::vector<Index> local_index;  // interface DOFs in subdomain-local numbering
  InterfaceOperator op;
};

struct LocalOsm {
  SubdomainDofs dofs;
  CsrMatrix a;
  std::vector<Coupling> couplings;  // ascending neighbor
};

LocalOsm assemble_local_osm(const Mesh& mesh, const DofMap& dofs, const Partition& partition, int i,
                            const WavenumberField& k, const TransmissionParams& params);

}  // namespace ddlab
