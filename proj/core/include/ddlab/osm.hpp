// SPDX-License-Identifier: Apache-2.0
//
// Substructured optimized Schwarz method: interface unknowns g_ij on every
// ordered neighbor pair, the exchange operator T, the interface system
// (I - T) g = b and reconstruction of the volume field.
//
// Segment (i,j) holds g_ij: computed by subdomain i, read by subdomain j as
// the datum of its condition on Sigma_ij.

#pragma once

#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "ddlab/assembly.hpp"
#include "ddlab/krylov.hpp"

namespace ddlab {

struct InterfaceSegment {
  int from;
  int to;
  Index offset;
  Index length;
};

class InterfaceLayout {
 public:
  InterfaceLayout() = default;
  explicit InterfaceLayout(const std::map<std::pair<int, int>, std::vector<Dof>>& interfaces);

  Index size() const { return size_; }
  const std::vector<InterfaceSegment>& segments() const { return segments_; }
  const InterfaceSegment& segment(int from, int to) const;

 private:
  std::vector<InterfaceSegment> segments_;
  std::map<std::pair<int, int>, std::size_t> index_;
  Index size_ = 0;
};

struct OsmCoupling {
  int neighbor;
  std::vector<Index> local_index;  // Sigma DOFs in subdomain-local numbering
  std::vector<Dof> global_dofs;    // canonical interface order
  CsrMatrix s_mat;
  CsrMatrix mass;
  Factorization mass_factor;
};

struct OsmSubdomain {
  SubdomainDofs dofs;
  Factorization factor;
  std::vector<OsmCoupling> couplings;  // ascending neighbor
};

struct OsmContext {
  Index size = 0;  // global DOF count
  InterfaceLayout layout;
  std::vector<OsmSubdomain> subdomains;
  std::vector<int> owner;  // lowest incident label per global DOF
  TransmissionParams params;
};

OsmContext build_osm(const Mesh& mesh, const DofMap& dofs, const Partition& partition, const WavenumberField& k,
                     const TransmissionParams& params);

/// Interface datum produced by the local solves with the sources and zero
/// incoming traces.
MultiVector compute_b(const OsmContext& ctx, const MultiVector& sources, CostCounters* counters = nullptr);
/// Homogeneous exchange: (T g)_ij = -g_ji - 2 M^{-1} S u_i with A_i u_i = sum_j M g_ji.
MultiVector apply_T(const OsmContext& ctx, const MultiVector& g, CostCounters* counters = nullptr);
MultiVector apply_IminusT(const OsmContext& ctx, const MultiVector& g, CostCounters* counters = nullptr);

LinearOperator osm_operator(const OsmContext& ctx);        // I - T
LinearOperator osm_fixed_point(const OsmContext& ctx);     // T

/// Local solves with the sources and incoming g; shared DOFs come from the
/// lowest-index subdomain.
MultiVector reconstruct(const OsmContext& ctx, const MultiVector& g, const MultiVector& sources,
                        CostCounters* counters = nullptr);

/// Per column: max over pairs of |u_i - u_j| on Sigma_ij divided by max|U|.
std::vector<double> continuity_defect(const OsmContext& ctx, const MultiVector& g, const MultiVector& sources);

struct OsmSolution {
  MultiVector g;
  MultiVector u;
  RunStats stats;
};

/// Unpreconditioned GMRES on (I - T) g = b, then reconstruction.
OsmSolution solve_osm(const OsmContext& ctx, const MultiVector& sources, const KrylovConfig& cfg,
                      const IterateObserver& observer = {});

/// CSV "from,to,position,dof,re,im" of one column of g.
void write_interface_csv(const OsmContext& ctx, const MultiVector& g, Index column, std::ostream& out);

}  // namespace ddlab
