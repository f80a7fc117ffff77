// SPDX-License-Identifier: Apache-2.0

#include "ddlab/osm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace ddlab {

InterfaceLayout::InterfaceLayout(const std::map<std::pair<int, int>, std::vector<Dof>>& interfaces) {
  for (const auto& [key, list] : interfaces) {
    index_[key] = segments_.size();
    segments_.push_back({key.first, key.second, size_, static_cast<Index>(list.size())});
    size_ += static_cast<Index>(list.size());
  }
}

const InterfaceSegment& InterfaceLayout::segment(int from, int to) const {
  const auto it = index_.find({from, to});
  if (it == index_.end()) {
    std::ostringstream msg;
    msg << "InterfaceLayout: no segment (" << from << ", " << to << ")";
    throw std::out_of_range(msg.str());
  }
  return segments_[it->second];
}

OsmContext build_osm(const Mesh& mesh, const DofMap& dofs, const Partition& partition, const WavenumberField& k,
                     const TransmissionParams& params) {
  OsmContext ctx;
  ctx.size = dofs.num_dofs();
  ctx.params = params;
  ctx.layout = InterfaceLayout(extract_interfaces(partition, dofs));
  ctx.owner = dof_owners(partition, dofs, mesh);
  for (int i = 0; i < partition.count(); ++i) {
    LocalOsm local = assemble_local_osm(mesh, dofs, partition, i, k, params);
    OsmSubdomain sub;
    sub.dofs = std::move(local.dofs);
    try {
      sub.factor = factorize(local.a);
    } catch (const LinalgError& e) {
      std::ostringstream msg;
      msg << "build_osm: subdomain " << i << ": " << e.what();
      throw LinalgError(msg.str());
    }
    for (auto& c : local.couplings) {
      OsmCoupling oc;
      oc.neighbor = c.neighbor;
      oc.local_index = std::move(c.local_index);
      oc.global_dofs = std::move(c.op.dofs);
      oc.s_mat = std::move(c.op.s_mat);
      oc.mass = std::move(c.op.mass);
      try {
        oc.mass_factor = factorize(oc.mass);
      } catch (const LinalgError& e) {
        std::ostringstream msg;
        msg << "build_osm: interface mass (" << i << ", " << c.neighbor << "): " << e.what();
        throw LinalgError(msg.str());
      }
      if (static_cast<Index>(oc.global_dofs.size()) != ctx.layout.segment(i, oc.neighbor).length)
        throw LinalgError("build_osm: interface operator and layout disagree");
      sub.couplings.push_back(std::move(oc));
    }
    ctx.subdomains.push_back(std::move(sub));
  }
  return ctx;
}

namespace {

struct LocalSolves {
  std::vector<MultiVector> u;         // per subdomain, local numbering
  std::vector<std::vector<MultiVector>> incoming;  // per subdomain and coupling
};

// A_i u_i = D_i R_i f + sum_j M g_ji, either term optional.
LocalSolves local_solves(const OsmContext& ctx, const MultiVector* sources, const MultiVector* g,
                         CostCounters* counters) {
  const Index width = sources != nullptr ? sources->cols() : g->cols();
  if (sources != nullptr && sources->rows() != ctx.size) throw LinalgError("osm: sources do not match the DOF map");
  if (g != nullptr && g->rows() != ctx.layout.size()) throw LinalgError("osm: interface field does not match the layout");
  if (sources != nullptr && g != nullptr && g->cols() != width) throw LinalgError("osm: batch width mismatch");
  LocalSolves out;
  out.u.resize(ctx.subdomains.size());
  out.incoming.resize(ctx.subdomains.size());
  for (int i = 0; i < static_cast<int>(ctx.subdomains.size()); ++i) {
    const OsmSubdomain& sub = ctx.subdomains[static_cast<std::size_t>(i)];
    const auto& l2g = sub.dofs.local_to_global;
    const auto n_local = static_cast<Index>(l2g.size());
    MultiVector load = MultiVector::Zero(n_local, width);
    if (sources != nullptr) {
      ScopedTimer timer(counters, CostCategory::exchange);
      for (Index l = 0; l < n_local; ++l)
        if (ctx.owner[l2g[l]] == i) load.row(l) = sources->row(l2g[l]);
    }
    auto& incoming = out.incoming[static_cast<std::size_t>(i)];
    incoming.resize(sub.couplings.size());
    if (g != nullptr) {
      for (std::size_t c = 0; c < sub.couplings.size(); ++c) {
        const OsmCoupling& cp = sub.couplings[c];
        const InterfaceSegment& seg = ctx.layout.segment(cp.neighbor, i);
        {
          ScopedTimer timer(counters, CostCategory::exchange);
          incoming[c] = g->middleRows(seg.offset, seg.length);
        }
        const MultiVector mg = spmm(cp.mass, incoming[c], counters);
        ScopedTimer timer(counters, CostCategory::exchange);
        for (std::size_t q = 0; q < cp.local_index.size(); ++q) load.row(cp.local_index[q]) += mg.row(static_cast<Index>(q));
      }
    }
    out.u[static_cast<std::size_t>(i)] = solve_batch(sub.factor, load, counters);
  }
  return out;
}

// Outgoing interface field -[g_ji] - 2 M^{-1} S u_i; fills `volume` from
// owned DOFs when given.
MultiVector exchange(const OsmContext& ctx, const MultiVector* sources, const MultiVector* g, CostCounters* counters,
                     MultiVector* volume) {
  const Index width = sources != nullptr ? sources->cols() : g->cols();
  const LocalSolves solves = local_solves(ctx, sources, g, counters);
  MultiVector out = MultiVector::Zero(ctx.layout.size(), width);
  if (volume != nullptr) *volume = MultiVector::Zero(ctx.size, width);
  for (int i = 0; i < static_cast<int>(ctx.subdomains.size()); ++i) {
    const OsmSubdomain& sub = ctx.subdomains[static_cast<std::size_t>(i)];
    const MultiVector& u = solves.u[static_cast<std::size_t>(i)];
    const auto& l2g = sub.dofs.local_to_global;
    if (volume != nullptr) {
      for (std::size_t l = 0; l < l2g.size(); ++l)
        if (ctx.owner[l2g[l]] == i) volume->row(l2g[l]) = u.row(static_cast<Index>(l));
    }
    for (std::size_t c = 0; c < sub.couplings.size(); ++c) {
      const OsmCoupling& cp = sub.couplings[c];
      MultiVector trace(static_cast<Index>(cp.local_index.size()), width);
      for (std::size_t q = 0; q < cp.local_index.size(); ++q) trace.row(static_cast<Index>(q)) = u.row(cp.local_index[q]);
      const MultiVector su = spmm(cp.s_mat, trace, counters);
      MultiVector t = -2.0 * solve_batch(cp.mass_factor, su, counters);
      if (g != nullptr) t -= solves.incoming[static_cast<std::size_t>(i)][c];
      ScopedTimer timer(counters, CostCategory::exchange);
      const InterfaceSegment& seg = ctx.layout.segment(i, cp.neighbor);
      out.middleRows(seg.offset, seg.length) = t;
    }
  }
  return out;
}

}  // namespace

MultiVector compute_b(const OsmContext& ctx, const MultiVector& sources, CostCounters* counters) {
  return exchange(ctx, &sources, nullptr, counters, nullptr);
}

MultiVector apply_T(const OsmContext& ctx, const MultiVector& g, CostCounters* counters) {
  return exchange(ctx, nullptr, &g, counters, nullptr);
}

MultiVector apply_IminusT(const OsmContext& ctx, const MultiVector& g, CostCounters* counters) {
  return g - apply_T(ctx, g, counters);
}

LinearOperator osm_operator(const OsmContext& ctx) {
  LinearOperator op;
  op.size = ctx.layout.size();
  op.category = CostCategory::local_solve;
  op.apply = [&ctx](const MultiVector& g, CostCounters* c) { return apply_IminusT(ctx, g, c); };
  return op;
}

LinearOperator osm_fixed_point(const OsmContext& ctx) {
  LinearOperator op;
  op.size = ctx.layout.size();
  op.category = CostCategory::local_solve;
  op.apply = [&ctx](const MultiVector& g, CostCounters* c) { return apply_T(ctx, g, c); };
  return op;
}

MultiVector reconstruct(const OsmContext& ctx, const MultiVector& g, const MultiVector& sources,
                        CostCounters* counters) {
  MultiVector u;
  exchange(ctx, &sources, &g, counters, &u);
  return u;
}

std::vector<double> continuity_defect(const OsmContext& ctx, const MultiVector& g, const MultiVector& sources) {
  const Index width = sources.cols();
  const auto local = local_solves(ctx, &sources, &g, nullptr).u;
  std::vector<double> scale(static_cast<std::size_t>(width), 0.0);
  for (const auto& u : local)
    for (Index c = 0; c < width && u.rows() > 0; ++c) scale[c] = std::max(scale[c], u.col(c).cwiseAbs().maxCoeff());
  std::vector<double> out(static_cast<std::size_t>(width), 0.0);
  for (int i = 0; i < static_cast<int>(ctx.subdomains.size()); ++i) {
    const OsmSubdomain& sub = ctx.subdomains[static_cast<std::size_t>(i)];
    for (const auto& cp : sub.couplings) {
      const OsmSubdomain& other = ctx.subdomains[static_cast<std::size_t>(cp.neighbor)];
      for (const Dof d : cp.global_dofs) {
        const Index li = sub.dofs.local(d);
        const Index lj = other.dofs.local(d);
        for (Index c = 0; c < width; ++c)
          out[c] = std::max(out[c], std::abs(local[static_cast<std::size_t>(i)](li, c) -
                                             local[static_cast<std::size_t>(cp.neighbor)](lj, c)));
      }
    }
  }
  for (Index c = 0; c < width; ++c)
    if (scale[c] > 0.0) out[c] /= scale[c];
  return out;
}

OsmSolution solve_osm(const OsmContext& ctx, const MultiVector& sources, const KrylovConfig& cfg,
                      const IterateObserver& observer) {
  OsmSolution sol;
  CostCounters setup;
  const auto start = std::chrono::steady_clock::now();
  const MultiVector b = compute_b(ctx, sources, &setup);
  const LinearOperator op = osm_operator(ctx);
  GmresResult r = pblock_gmres(op, nullptr, b, cfg, observer);
  sol.g = std::move(r.x);
  sol.stats = std::move(r.stats);
  sol.u = reconstruct(ctx, sol.g, sources, &setup);
  for (std::size_t c = 0; c < kCostCategoryCount; ++c) {
    const auto cat = static_cast<CostCategory>(c);
    sol.stats.counters.add(cat, std::chrono::nanoseconds(static_cast<std::int64_t>(setup.seconds(cat) * 1e9)));
  }
  sol.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

void write_interface_csv(const OsmContext& ctx, const MultiVector& g, Index column, std::ostream& out) {
  if (g.rows() != ctx.layout.size() || column < 0 || column >= g.cols())
    throw LinalgError("write_interface_csv: field does not match the layout");
  const auto old = out.precision(17);
  out << "from,to,position,dof,re,im\n";
  for (const auto& seg : ctx.layout.segments()) {
    const OsmSubdomain& sub = ctx.subdomains[static_cast<std::size_t>(seg.from)];
    const auto it = std::find_if(sub.couplings.begin(), sub.couplings.end(),
                                 [&](const OsmCoupling& c) { return c.neighbor == seg.to; });
    for (Index q = 0; q < seg.length; ++q) {
      const Complex v = g(seg.offset + q, column);
      out << seg.from << ',' << seg.to << ',' << q << ',' << it->global_dofs[static_cast<std::size_t>(q)] << ','
          << v.real() << ',' << v.imag() << '\n';
    }
  }
  out.precision(old);
}

}  // namespace ddlab
