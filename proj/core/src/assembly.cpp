// SPDX-License-Identifier: Apache-2.0

#include "ddlab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace ddlab {

namespace {

constexpr Complex kI{0.0, 1.0};

struct Geometry {
  double area;                            // |T|
  std::array<std::array<double, 2>, 3> grad_lambda;
};

Geometry geometry(const Mesh& mesh, Element t) {
  const auto& tri = mesh.triangles()[t];
  const Point& p0 = mesh.vertices()[tri[0]];
  const Point& p1 = mesh.vertices()[tri[1]];
  const Point& p2 = mesh.vertices()[tri[2]];
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  if (!(std::abs(det) > 0.0)) {
    std::ostringstream msg;
    msg << "assembly: degenerate triangle " << t;
    throw MeshError(msg.str());
  }
  Geometry g;
  g.area = 0.5 * std::abs(det);
  g.grad_lambda[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
  g.grad_lambda[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
  g.grad_lambda[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
  return g;
}

// Precomputed basis values and lambda-derivatives at the quadrature points.
struct Tabulation {
  std::vector<QuadraturePoint> rule;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::array<double, 3>>> dlambda;

  Tabulation(const LagrangeTriangle& basis, int degree) : rule(triangle_rule(degree)) {
    const auto n = static_cast<std::size_t>(basis.num_nodes());
    for (const auto& q : rule) {
      values.emplace_back(n);
      dlambda.emplace_back(n);
      basis.eval(q.barycentric, values.back().data());
      basis.eval_dlambda(q.barycentric, dlambda.back().data());
    }
  }
};

void push_block(std::vector<Triplet>& out, const std::vector<Index>& rows, const Eigen::MatrixXcd& block) {
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < rows.size(); ++b)
      out.push_back({rows[a], rows[b], block(static_cast<Index>(a), static_cast<Index>(b))});
}

// Integrates c0 * phi_a phi_b * w(t) + c1 * dphi_a/ds dphi_b/ds * v(t) along
// one edge, where w and v are functions of the wavenumber on the edge.
template <typename MassWeight, typename StiffWeight>
Eigen::MatrixXcd edge_block(const Mesh& mesh, const DofMap& dofs, EdgeId e, const WavenumberField& k,
                            MassWeight mass_weight, StiffWeight stiff_weight) {
  const int p = dofs.order();
  const auto& edge = mesh.edges()[e];
  const Point& a = mesh.vertices()[edge.v0];
  const Point& b = mesh.vertices()[edge.v1];
  const double length = std::hypot(b.x - a.x, b.y - a.y);
  const double k0 = k.at_vertex(edge.v0);
  const double k1 = k.at_vertex(edge.v1);
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(p + 1, p + 1);
  std::vector<double> phi(static_cast<std::size_t>(p) + 1), dphi(static_cast<std::size_t>(p) + 1);
  for (const auto& q : segment_rule(2 * p + 1)) {
    const double t = q.barycentric[1];
    const double kt = (1.0 - t) * k0 + t * k1;
    segment_basis(p, t, phi.data(), dphi.data());
    const Complex wm = mass_weight(kt) * q.weight * length;
    const Complex ws = stiff_weight(kt) * q.weight / length;
    for (int r = 0; r <= p; ++r)
      for (int c = 0; c <= p; ++c) block(r, c) += wm * phi[r] * phi[c] + ws * dphi[r] * dphi[c];
  }
  return block;
}

std::vector<Index> map_local(std::span<const Dof> global, const SubdomainDofs& local) {
  std::vector<Index> out(global.size());
  for (std::size_t a = 0; a < global.size(); ++a) out[a] = local.local(global[a]);
  return out;
}

SubdomainDofs identity_numbering(const DofMap& dofs) {
  SubdomainDofs s;
  s.local_to_global.resize(static_cast<std::size_t>(dofs.num_dofs()));
  s.global_to_local.resize(static_cast<std::size_t>(dofs.num_dofs()));
  for (Dof d = 0; d < dofs.num_dofs(); ++d) {
    s.local_to_global[d] = d;
    s.global_to_local[d] = d;
  }
  return s;
}

std::vector<Element> all_elements(const Mesh& mesh) {
  std::vector<Element> out(static_cast<std::size_t>(mesh.num_triangles()));
  for (Element t = 0; t < mesh.num_triangles(); ++t) out[t] = t;
  return out;
}

// Subtracts the interface operator, embedded through `local`, from a.
CsrMatrix subtract_embedded(const CsrMatrix& a, const InterfaceOperator& op, const SubdomainDofs& local) {
  std::vector<Triplet> t;
  const auto off = op.s_mat.row_offsets();
  const auto idx = op.s_mat.col_indices();
  const auto val = op.s_mat.values();
  for (Index r = 0; r < op.s_mat.rows(); ++r)
    for (Index q = off[r]; q < off[r + 1]; ++q)
      t.push_back({local.local(op.dofs[r]), local.local(op.dofs[idx[q]]), val[q]});
  return a - CsrMatrix::from_triplets(a.rows(), a.cols(), t);
}

}  // namespace

void TransmissionParams::validate() const {
  if (order != 0 && order != 2) throw std::invalid_argument("TransmissionParams: order must be 0 or 2");
  if (order == 0 && beta_hat != Complex(0.0)) throw std::invalid_argument("TransmissionParams: order 0 needs beta_hat = 0");
  if (alpha_hat.real() < 0.0) throw std::invalid_argument("TransmissionParams: Re(alpha_hat) must be >= 0");
  if (!std::isfinite(alpha_hat.real()) || !std::isfinite(alpha_hat.imag()) || !std::isfinite(beta_hat.real()) ||
      !std::isfinite(beta_hat.imag()))
    throw std::invalid_argument("TransmissionParams: coefficients must be finite");
}

CsrMatrix assemble_volume(const Mesh& mesh, const DofMap& dofs, const WavenumberField& k,
                          std::span<const Element> elements, const SubdomainDofs& local) {
  const auto& basis = dofs.basis();
  const int nloc = basis.num_nodes();
  const Tabulation tab(basis, 2 * dofs.order() + 2);
  std::vector<Triplet> triplets;
  triplets.reserve(elements.size() * static_cast<std::size_t>(nloc * nloc));
  Eigen::MatrixXcd block(nloc, nloc);
  std::vector<std::array<double, 2>> grad(static_cast<std::size_t>(nloc));
  for (const Element t : elements) {
    const Geometry g = geometry(mesh, t);
    block.setZero();
    for (std::size_t q = 0; q < tab.rule.size(); ++q) {
      const double w = tab.rule[q].weight * 2.0 * g.area;
      const double kq = k.at(mesh, t, tab.rule[q].barycentric);
      const auto& phi = tab.values[q];
      const auto& dl = tab.dlambda[q];
      for (int a = 0; a < nloc; ++a) {
        grad[a] = {0.0, 0.0};
        for (int m = 0; m < 3; ++m) {
          grad[a][0] += dl[a][m] * g.grad_lambda[m][0];
          grad[a][1] += dl[a][m] * g.grad_lambda[m][1];
        }
      }
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b)
          block(a, b) += w * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1] - kq * kq * phi[a] * phi[b]);
    }
    push_block(triplets, map_local(dofs.element(t), local), block);

    for (int le = 0; le < 3; ++le) {
      const EdgeId e = mesh.triangle_edges(t)[le];
      if (!mesh.is_boundary_edge(e)) continue;
      const auto robin = edge_block(
          mesh, dofs, e, k, [](double kt) { return -kI * kt; }, [](double) { return Complex(0.0); });
      const auto ed = dofs.edge_dofs(e);
      push_block(triplets, map_local(ed, local), robin);
    }
  }
  CsrMatrix a = CsrMatrix::from_triplets(local.size(), local.size(), triplets);
  a.set_symmetric(true);
  return a;
}

CsrMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  const auto& basis = dofs.basis();
  const int nloc = basis.num_nodes();
  const Tabulation tab(basis, 2 * dofs.order());
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * nloc * nloc);
  Eigen::MatrixXcd block(nloc, nloc);
  for (Element t = 0; t < mesh.num_triangles(); ++t) {
    const Geometry g = geometry(mesh, t);
    block.setZero();
    for (std::size_t q = 0; q < tab.rule.size(); ++q) {
      const double w = tab.rule[q].weight * 2.0 * g.area;
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) block(a, b) += w * tab.values[q][a] * tab.values[q][b];
    }
    const auto el = dofs.element(t);
    push_block(triplets, std::vector<Index>(el.begin(), el.end()), block);
  }
  CsrMatrix m = CsrMatrix::from_triplets(dofs.num_dofs(), dofs.num_dofs(), triplets);
  m.set_symmetric(true);
  return m;
}

AssembledProblem assemble_global(const Mesh& mesh, const DofMap& dofs, const WavenumberField& k) {
  const auto elements = all_elements(mesh);
  AssembledProblem out;
  out.a = assemble_volume(mesh, dofs, k, elements, identity_numbering(dofs));
  out.mass = assemble_mass(mesh, dofs);
  out.sources = MultiVector(dofs.num_dofs(), 0);
  return out;
}

namespace {

bool barycentric_of(const Mesh& mesh, Element t, const Point& p, std::array<double, 3>& lambda) {
  const auto& tri = mesh.triangles()[t];
  const Point& p0 = mesh.vertices()[tri[0]];
  const Point& p1 = mesh.vertices()[tri[1]];
  const Point& p2 = mesh.vertices()[tri[2]];
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  lambda[1] = ((p.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p.y - p0.y)) / det;
  lambda[2] = ((p1.x - p0.x) * (p.y - p0.y) - (p.x - p0.x) * (p1.y - p0.y)) / det;
  lambda[0] = 1.0 - lambda[1] - lambda[2];
  constexpr double tol = 1e-12;
  if (lambda[0] < -tol || lambda[1] < -tol || lambda[2] < -tol) return false;
  for (double& l : lambda) l = std::clamp(l, 0.0, 1.0);
  const double s = lambda[0] + lambda[1] + lambda[2];
  for (double& l : lambda) l /= s;
  return true;
}

}  // namespace

Element locate(const Mesh& mesh, const Point& p, std::array<double, 3>& barycentric) {
  if (mesh.grid_nx() > 0 && mesh.grid_ny() > 0) {
    const int nx = mesh.grid_nx(), ny = mesh.grid_ny();
    const int ci = static_cast<int>(std::floor(p.x / mesh.lx() * nx));
    const int cj = static_cast<int>(std::floor(p.y / mesh.ly() * ny));
    for (int j = cj - 1; j <= cj + 1; ++j) {
      for (int i = ci - 1; i <= ci + 1; ++i) {
        if (i < 0 || j < 0 || i >= nx || j >= ny) continue;
        const Element base = 2 * (static_cast<Element>(j) * nx + i);
        for (Element t = base; t < base + 2; ++t)
          if (barycentric_of(mesh, t, p, barycentric)) return t;
      }
    }
    return -1;
  }
  for (Element t = 0; t < mesh.num_triangles(); ++t)
    if (barycentric_of(mesh, t, p, barycentric)) return t;
  return -1;
}

MultiVector assemble_point_source(const Mesh& mesh, const DofMap& dofs, const Point& xs) {
  std::array<double, 3> lambda{};
  const Element t = locate(mesh, xs, lambda);
  if (t < 0) {
    std::ostringstream msg;
    msg << "assemble_point_source: (" << xs.x << ", " << xs.y << ") is outside the mesh";
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> phi(static_cast<std::size_t>(dofs.dofs_per_element()));
  dofs.basis().eval(lambda, phi.data());
  MultiVector f = MultiVector::Zero(dofs.num_dofs(), 1);
  const auto el = dofs.element(t);
  for (std::size_t a = 0; a < el.size(); ++a) f(el[a], 0) = phi[a];
  return f;
}

MultiVector assemble_point_sources(const Mesh& mesh, const DofMap& dofs, std::span<const Point> positions) {
  MultiVector f(dofs.num_dofs(), static_cast<Index>(positions.size()));
  for (std::size_t s = 0; s < positions.size(); ++s)
    f.col(static_cast<Index>(s)) = assemble_point_source(mesh, dofs, positions[s]);
  return f;
}

InterfaceOperator assemble_interface_operator(const Mesh& mesh, const DofMap& dofs, std::span<const EdgeId> edges,
                                              const WavenumberField& k, const TransmissionParams& params) {
  params.validate();
  if (edges.empty()) throw std::invalid_argument("assemble_interface_operator: empty interface");
  InterfaceOperator op;
  op.dofs = edge_set_dofs(dofs, edges);
  const auto n = static_cast<Index>(op.dofs.size());
  std::vector<Index> position(static_cast<std::size_t>(dofs.num_dofs()), -1);
  for (Index r = 0; r < n; ++r) position[op.dofs[r]] = r;

  const Complex alpha = params.alpha_hat;
  const Complex beta = params.beta_hat;
  std::vector<Triplet> s_entries, m_entries;
  for (const EdgeId e : edges) {
    const auto ed = dofs.edge_dofs(e);
    std::vector<Index> rows(ed.size());
    for (std::size_t a = 0; a < ed.size(); ++a) rows[a] = position[ed[a]];
    const auto s_block = edge_block(
        mesh, dofs, e, k, [alpha](double kt) { return kI * alpha * kt; },
        [beta](double kt) { return -beta / (kI * kt); });
    const auto m_block = edge_block(
        mesh, dofs, e, k, [](double) { return Complex(1.0); }, [](double) { return Complex(0.0); });
    push_block(s_entries, rows, s_block);
    push_block(m_entries, rows, m_block);
  }
  op.s_mat = CsrMatrix::from_triplets(n, n, s_entries);
  op.mass = CsrMatrix::from_triplets(n, n, m_entries);
  op.s_mat.set_symmetric(true);
  op.mass.set_symmetric(true);
  return op;
}

LocalMatrix assemble_local_oras(const Mesh& mesh, const DofMap& dofs, const OverlapPartition& overlap, int i,
                                const WavenumberField& k, const TransmissionParams& params) {
  params.validate();
  const auto& elements = overlap.extended_elements(i);
  LocalMatrix out;
  out.dofs = subdomain_dofs(dofs, elements);
  out.a = assemble_volume(mesh, dofs, k, elements, out.dofs);
  const auto& rim = overlap.artificial_boundary(i);
  if (!rim.empty()) {
    out.a = subtract_embedded(out.a, assemble_interface_operator(mesh, dofs, rim, k, params), out.dofs);
    out.a.set_symmetric(true);
  }
  return out;
}

LocalOsm assemble_local_osm(const Mesh& mesh, const DofMap& dofs, const Partition& partition, int i,
                            const WavenumberField& k, const TransmissionParams& params) {
  params.validate();
  const auto elements = partition.elements_of(i);
  LocalOsm out;
  out.dofs = subdomain_dofs(dofs, elements);
  out.a = assemble_volume(mesh, dofs, k, elements, out.dofs);
  for (const int j : partition.neighbors(i)) {
    Coupling c;
    c.neighbor = j;
    c.op = assemble_interface_operator(mesh, dofs, partition.interfaces().at({i, j}), k, params);
    c.local_index = map_local(c.op.dofs, out.dofs);
    out.a = subtract_embedded(out.a, c.op, out.dofs);
    out.couplings.push_back(std::move(c));
  }
  out.a.set_symmetric(true);
  return out;
}

}  // namespace ddlab
