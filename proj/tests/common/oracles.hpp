// Dense reference implementations for the substructured solver: the
// monolithic coupled system (volume unknowns of every subdomain plus every
// interface field), its Schur complement, and the plain Schwarz sweep.

#pragma once

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddlab/assembly.hpp"

namespace ddlab::oracle {

class DenseOsm {
 public:
  DenseOsm(const Mesh& mesh, const DofMap& d, const Partition& p, const WavenumberField& k,
           const TransmissionParams& params) {
    const int n = p.count();
    owner_.assign(static_cast<std::size_t>(d.num_dofs()), n);
    for (Element t = 0; t < mesh.num_triangles(); ++t)
      for (const Dof g : d.element(t)) owner_[g] = std::min(owner_[g], p.subdomain_of(t));

    lists_ = extract_interfaces(p, d);
    Index off = 0;
    for (const auto& [key, list] : lists_) {
      goff_[key] = off;
      off += static_cast<Index>(list.size());
    }
    ng_ = off;

    subs_.resize(static_cast<std::size_t>(n));
    Index uoff = 0;
    for (int i = 0; i < n; ++i) {
      Sub& s = subs_[static_cast<std::size_t>(i)];
      const auto elements = p.elements_of(i);
      s.local = subdomain_dofs(d, elements);
      s.a = assemble_volume(mesh, d, k, elements, s.local).to_dense();
      s.offset = uoff;
      uoff += s.local.size();
      for (const auto& [key, edges] : p.interfaces()) {
        if (key.first != i) continue;
        Iface f;
        f.neighbor = key.second;
        const InterfaceOperator op = assemble_interface_operator(mesh, d, edges, k, params);
        // Reorder into the interface list order.
        const auto& list = lists_.at(key);
        std::map<Dof, Index> pos;
        for (std::size_t q = 0; q < op.dofs.size(); ++q) pos[op.dofs[q]] = static_cast<Index>(q);
        const Index m = static_cast<Index>(list.size());
        f.s = MultiVector(m, m);
        f.mass = MultiVector(m, m);
        const MultiVector ds = op.s_mat.to_dense(), dm = op.mass.to_dense();
        for (Index r = 0; r < m; ++r)
          for (Index c = 0; c < m; ++c) {
            f.s(r, c) = ds(pos.at(list[r]), pos.at(list[c]));
            f.mass(r, c) = dm(pos.at(list[r]), pos.at(list[c]));
          }
        f.mass_inv_s = f.mass.partialPivLu().solve(f.s);
        for (const Dof g : list) f.local.push_back(s.local.local(g));
        for (Index r = 0; r < m; ++r)
          for (Index c = 0; c < m; ++c) s.a(f.local[r], f.local[c]) -= f.s(r, c);
        s.ifaces.push_back(std::move(f));
      }
      s.lu = s.a.partialPivLu();
    }
    nu_ = uoff;
  }

  Index interface_size() const { return ng_; }
  Index segment_offset(int from, int to) const { return goff_.at({from, to}); }

  /// Monolithic matrix on [u_0, u_1, ..., g] and its right-hand side.
  MultiVector monolithic() const {
    MultiVector k = MultiVector::Zero(nu_ + ng_, nu_ + ng_);
    for (int i = 0; i < static_cast<int>(subs_.size()); ++i) {
      const Sub& s = subs_[static_cast<std::size_t>(i)];
      const Index n = s.local.size();
      k.block(s.offset, s.offset, n, n) = s.a;
      for (const Iface& f : s.ifaces) {
        const Index m = static_cast<Index>(f.local.size());
        const Index in = nu_ + goff_.at({f.neighbor, i});  // g_ji
        const Index outg = nu_ + goff_.at({i, f.neighbor});  // g_ij
        for (Index r = 0; r < m; ++r) {
          for (Index c = 0; c < m; ++c) {
            // A_i u_i - M g_ji = D_i f
            k(s.offset + f.local[r], in + c) -= f.mass(r, c);
            // g_ij + g_ji + 2 M^{-1} S u_i = 0
            k(outg + r, s.offset + f.local[c]) += 2.0 * f.mass_inv_s(r, c);
          }
          k(outg + r, outg + r) += 1.0;
          k(outg + r, in + r) += 1.0;
        }
      }
    }
    return k;
  }

  MultiVector monolithic_rhs(const MultiVector& f) const {
    MultiVector r = MultiVector::Zero(nu_ + ng_, f.cols());
    for (int i = 0; i < static_cast<int>(subs_.size()); ++i) {
      const Sub& s = subs_[static_cast<std::size_t>(i)];
      for (Index l = 0; l < s.local.size(); ++l) {
        const Dof g = s.local.local_to_global[l];
        if (owner_[g] == i) r.row(s.offset + l) = f.row(g);
      }
    }
    return r;
  }

  /// Schur complement of the monolithic system with respect to all u_i.
  MultiVector schur() const {
    const MultiVector k = monolithic();
    const auto kuu = k.topLeftCorner(nu_, nu_);
    return k.bottomRightCorner(ng_, ng_) - k.bottomLeftCorner(ng_, nu_) * kuu.partialPivLu().solve(k.topRightCorner(nu_, ng_));
  }

  /// Reduced right-hand side of the Schur system.
  MultiVector schur_rhs(const MultiVector& f) const {
    const MultiVector k = monolithic();
    const MultiVector r = monolithic_rhs(f);
    return r.bottomRows(ng_) - k.bottomLeftCorner(ng_, nu_) * k.topLeftCorner(nu_, nu_).partialPivLu().solve(r.topRows(nu_));
  }

  /// One Schwarz sweep: local solves with the sources and the incoming
  /// fields, then g_ij = -g_ji - 2 M^{-1} S u_i on every interface.
  MultiVector sweep(const MultiVector& f, const MultiVector& g) const {
    MultiVector out = MultiVector::Zero(ng_, f.cols());
    const MultiVector rhs = monolithic_rhs(f);
    for (int i = 0; i < static_cast<int>(subs_.size()); ++i) {
      const Sub& s = subs_[static_cast<std::size_t>(i)];
      MultiVector load = rhs.middleRows(s.offset, s.local.size());
      for (const Iface& fc : s.ifaces) {
        const MultiVector mg = fc.mass * g.middleRows(goff_.at({fc.neighbor, i}), static_cast<Index>(fc.local.size()));
        for (std::size_t q = 0; q < fc.local.size(); ++q) load.row(fc.local[q]) += mg.row(static_cast<Index>(q));
      }
      const MultiVector u = s.lu.solve(load);
      for (const Iface& fc : s.ifaces) {
        const Index m = static_cast<Index>(fc.local.size());
        MultiVector trace(m, f.cols());
        for (Index q = 0; q < m; ++q) trace.row(q) = u.row(fc.local[q]);
        out.middleRows(goff_.at({i, fc.neighbor}), m) =
            -g.middleRows(goff_.at({fc.neighbor, i}), m) - 2.0 * fc.mass_inv_s * trace;
      }
    }
    return out;
  }

 private:
  struct Iface {
    int neighbor;
    std::vector<Index> local;  // subdomain-local row of each list entry
    MultiVector s, mass, mass_inv_s;
  };
  struct Sub {
    SubdomainDofs local;
    MultiVector a;
    Eigen::PartialPivLU<MultiVector> lu;
    Index offset = 0;
    std::vector<Iface> ifaces;
  };

  std::vector<int> owner_;
  std::map<std::pair<int, int>, std::vector<Dof>> lists_;
  std::map<std::pair<int, int>, Index> goff_;
  std::vector<Sub> subs_;
  Index nu_ = 0;
  Index ng_ = 0;
};

/// Matrix of a linear map, one unit vector at a time.
template <typename F>
MultiVector assemble_columns(Index n, F&& apply) {
  MultiVector out(n, n);
  for (Index j = 0; j < n; ++j) {
    MultiVector e = MultiVector::Zero(n, 1);
    e(j, 0) = 1.0;
    out.col(j) = apply(e);
  }
  return out;
}

}  // namespace ddlab::oracle
