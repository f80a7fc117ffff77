// SPDX-License-Identifier: Apache-2.0

#include "ddlab/oras.hpp"

#include <numeric>
#include <sstream>

namespace ddlab {

OrasContext build_oras(const Mesh& mesh, const DofMap& dofs, const OverlapPartition& overlap,
                       const WavenumberField& k, const TransmissionParams& params, const CsrMatrix& a) {
  if (a.rows() != dofs.num_dofs()) throw LinalgError("build_oras: global matrix does not match the DOF map");
  OrasContext ctx;
  ctx.a = &a;
  ctx.size = a.rows();
  ctx.params = params;
  const auto owner = dof_owners(overlap.base(), dofs, mesh);
  for (int i = 0; i < overlap.count(); ++i) {
    LocalMatrix local = assemble_local_oras(mesh, dofs, overlap, i, k, params);
    OrasSubdomain sub;
    sub.dofs = std::move(local.dofs);
    sub.owned.resize(sub.dofs.local_to_global.size());
    for (std::size_t l = 0; l < sub.owned.size(); ++l) sub.owned[l] = owner[sub.dofs.local_to_global[l]] == i;
    try {
      sub.factor = factorize(local.a);
    } catch (const LinalgError& e) {
      std::ostringstream msg;
      msg << "build_oras: subdomain " << i << ": " << e.what();
      throw LinalgError(msg.str());
    }
    ctx.subdomains.push_back(std::move(sub));
  }
  const auto diag = partition_of_unity_diagonal(ctx);
  for (Index d = 0; d < ctx.size; ++d) {
    if (diag[d] != 1) {
      std::ostringstream msg;
      msg << "build_oras: partition of unity fails at DOF " << d << " (weight " << diag[d] << ")";
      throw LinalgError(msg.str());
    }
  }
  return ctx;
}

std::vector<int> partition_of_unity_diagonal(const OrasContext& ctx) {
  std::vector<int> diag(static_cast<std::size_t>(ctx.size), 0);
  for (const auto& sub : ctx.subdomains)
    for (std::size_t l = 0; l < sub.owned.size(); ++l) diag[sub.dofs.local_to_global[l]] += sub.owned[l] ? 1 : 0;
  return diag;
}

MultiVector apply_oras(const OrasContext& ctx, const MultiVector& v, CostCounters* counters, std::span<const int> order) {
  if (v.rows() != ctx.size) throw LinalgError("apply_oras: dimension mismatch");
  std::vector<int> ascending;
  if (order.empty()) {
    ascending.resize(ctx.subdomains.size());
    std::iota(ascending.begin(), ascending.end(), 0);
    order = ascending;
  }
  MultiVector w = MultiVector::Zero(v.rows(), v.cols());
  for (const int i : order) {
    const auto& sub = ctx.subdomains[static_cast<std::size_t>(i)];
    const auto& l2g = sub.dofs.local_to_global;
    MultiVector local(static_cast<Index>(l2g.size()), v.cols());
    for (std::size_t l = 0; l < l2g.size(); ++l) local.row(static_cast<Index>(l)) = v.row(l2g[l]);
    const MultiVector x = solve_batch(sub.factor, local, counters);
    for (std::size_t l = 0; l < l2g.size(); ++l)
      if (sub.owned[l]) w.row(l2g[l]) += x.row(static_cast<Index>(l));
  }
  return w;
}

LinearOperator oras_preconditioner(const OrasContext& ctx) {
  LinearOperator op;
  op.size = ctx.size;
  op.category = CostCategory::local_solve;
  op.apply = [&ctx](const MultiVector& v, CostCounters* c) { return apply_oras(ctx, v, c); };
  return op;
}

GmresResult solve_oras(const OrasContext& ctx, const MultiVector& sources, const KrylovConfig& cfg,
                       const IterateObserver& observer) {
  const LinearOperator a = matrix_operator(*ctx.a);
  const LinearOperator m = oras_preconditioner(ctx);
  return pblock_gmres(a, &m, sources, cfg, observer);
}

RichardsonResult richardson_oras(const OrasContext& ctx, const MultiVector& f, int iters, CostCounters* counters) {
  LinearOperator t;
  t.size = ctx.size;
  t.category = CostCategory::local_solve;
  t.apply = [&ctx](const MultiVector& u, CostCounters* c) {
    return MultiVector(u - apply_oras(ctx, spmm(*ctx.a, u, c), c));
  };
  return richardson(t, apply_oras(ctx, f, counters), iters, counters);
}

}  // namespace ddlab
