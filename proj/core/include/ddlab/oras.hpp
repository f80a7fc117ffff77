// SPDX-License-Identifier: Apache-2.0
//
// Optimized restricted additive Schwarz: M^{-1} = sum_i R_i^T D_i A_i^{-1} R_i
// with Boolean D_i, used as a right preconditioner for the global system.

#pragma once

#include <span>
#include <vector>

#include "ddlab/assembly.hpp"
#include "ddlab/krylov.hpp"

namespace ddlab {

struct OrasSubdomain {
  SubdomainDofs dofs;        // R_i: local_to_global
  std::vector<char> owned;   // D_i diagonal in local numbering
  Factorization factor;      // A_i
};

struct OrasContext {
  const CsrMatrix* a = nullptr;  // global matrix, not owned
  Index size = 0;
  std::vector<OrasSubdomain> subdomains;
  TransmissionParams params;
};

/// Assembles and factorizes every A_i; verifies sum R_i^T D_i R_i = I.
/// `a` must outlive the context.
OrasContext build_oras(const Mesh& mesh, const DofMap& dofs, const OverlapPartition& overlap,
                       const WavenumberField& k, const TransmissionParams& params, const CsrMatrix& a);

/// Diagonal of sum_i R_i^T D_i R_i as integers.
std::vector<int> partition_of_unity_diagonal(const OrasContext& ctx);

/// W = sum_i R_i^T D_i A_i^{-1} R_i V, summed in `order` (ascending when empty).
MultiVector apply_oras(const OrasContext& ctx, const MultiVector& v, CostCounters* counters = nullptr,
                       std::span<const int> order = {});

LinearOperator oras_preconditioner(const OrasContext& ctx);

/// Right-preconditioned GMRES on A x = sources.
GmresResult solve_oras(const OrasContext& ctx, const MultiVector& sources, const KrylovConfig& cfg,
                       const IterateObserver& observer = {});

/// Preconditioned Richardson u <- u + M^{-1}(f - A u) from u = 0.
RichardsonResult richardson_oras(const OrasContext& ctx, const MultiVector& f, int iters,
                                 CostCounters* counters = nullptr);

}  // namespace ddlab
