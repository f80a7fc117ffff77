#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "ddlab/assembly.hpp"
#include "ddlab/scenario.hpp"

using namespace ddlab;

namespace {

constexpr Complex kI{0.0, 1.0};

// k(x, y) = 2 pi f s(x, y) with s given per vertex.
WavenumberField field(const Mesh& mesh, double f, const std::function<double(const Point&)>& s) {
  std::vector<double> v(static_cast<std::size_t>(mesh.num_vertices()));
  for (Vertex i = 0; i < mesh.num_vertices(); ++i) v[i] = s(mesh.vertices()[i]);
  return WavenumberField(f, std::move(v));
}

MultiVector interpolate(const DofMap& d, const std::function<Complex(const Point&)>& u) {
  MultiVector x(d.num_dofs(), 1);
  for (Dof i = 0; i < d.num_dofs(); ++i) x(i, 0) = u(d.coordinate(i));
  return x;
}

Complex quad_form(const CsrMatrix& a, const MultiVector& u) { return (u.transpose() * spmm(a, u))(0, 0); }

// Boundary load sum_e int_e g phi_j for a per-edge datum g(point, outward normal).
MultiVector boundary_load(const Mesh& mesh, const DofMap& d, const std::function<Complex(const Point&, const Point&)>& g) {
  const int p = d.order();
  MultiVector f = MultiVector::Zero(d.num_dofs(), 1);
  std::vector<double> phi(p + 1), dphi(p + 1);
  for (const auto& be : mesh.boundary_edges()) {
    const EdgeId e = mesh.find_edge(be.v0, be.v1);
    const Point a = mesh.vertices()[mesh.edges()[e].v0];
    const Point b = mesh.vertices()[mesh.edges()[e].v1];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const Point mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    Point n{(b.y - a.y) / len, -(b.x - a.x) / len};
    if ((mid.x - 0.5 * mesh.lx()) * n.x + (mid.y - 0.5 * mesh.ly()) * n.y < 0) n = {-n.x, -n.y};
    const auto ed = d.edge_dofs(e);
    for (const auto& q : segment_rule(2 * p + 6)) {
      const double t = q.barycentric[1];
      segment_basis(p, t, phi.data(), dphi.data());
      const Point x{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      const Complex gv = g(x, n);
      for (int r = 0; r <= p; ++r) f(ed[r], 0) += q.weight * len * gv * phi[r];
    }
  }
  return f;
}

Mesh one_triangle() { return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, 1.0, 1.0); }

}  // namespace

TEST_CASE("dof counts on the two-triangle square") {
  const Mesh m = generate_rect_mesh(1, 1, 1.0, 1.0);
  CHECK(build_dofmap(m, 1).num_dofs() == 4);
  CHECK(build_dofmap(m, 2).num_dofs() == 9);
  CHECK(build_dofmap(m, 3).num_dofs() == 16);
  CHECK_THROWS(build_dofmap(m, 4));
  CHECK_THROWS(build_dofmap(m, 0));
  const Mesh g = generate_rect_mesh(7, 3, 7.0, 3.0);
  for (int p = 1; p <= 3; ++p) CHECK(build_dofmap(g, p).num_dofs() == (7 * p + 1) * (3 * p + 1));
}

TEST_CASE("dof map shares edge nodes between neighbours") {
  const Mesh m = generate_rect_mesh(3, 2, 3.0, 2.0);
  const DofMap d = build_dofmap(m, 3);
  for (Element t = 0; t < m.num_triangles(); ++t) {
    const auto el = d.element(t);
    const auto& lat = d.basis().lattice();
    const auto& tri = m.triangles()[t];
    for (int a = 0; a < d.dofs_per_element(); ++a) {
      const Point x = d.coordinate(el[a]);
      double px = 0, py = 0;
      for (int v = 0; v < 3; ++v) {
        px += lat[a][v] / 3.0 * m.vertices()[tri[v]].x;
        py += lat[a][v] / 3.0 * m.vertices()[tri[v]].y;
      }
      CHECK(x.x == doctest::Approx(px));
      CHECK(x.y == doctest::Approx(py));
    }
  }
}

TEST_CASE("reference triangle mass") {
  const Mesh m = one_triangle();
  const CsrMatrix mass = assemble_mass(m, build_dofmap(m, 1));
  const double expect[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(std::abs(mass.coeff(r, c) - expect[r][c] / 24.0) <= 1e-15);
}

TEST_CASE("mass and stiffness integrate interpolated polynomials exactly") {
  const Mesh m = generate_rect_mesh(3, 2, 1.0, 1.0);
  const auto zero_k = field(m, 1.0, [](const Point&) { return 0.0; });
  for (int p = 2; p <= 3; ++p) {
    const DofMap d = build_dofmap(m, p);
    const auto u = interpolate(d, [](const Point& x) { return Complex(x.x * x.x + x.y); });
    // int (x^2 + y)^2 = 13/15, int |grad|^2 = 7/3.
    CHECK(std::abs(quad_form(assemble_mass(m, d), u) - 13.0 / 15.0) <= 1e-13);
    const AssembledProblem ap = assemble_global(m, d, zero_k);
    CHECK(std::abs(quad_form(ap.a, u) - 7.0 / 3.0) <= 1e-13);
    // Constants are in the kernel of K.
    const MultiVector ones = MultiVector::Ones(d.num_dofs(), 1);
    CHECK(spmm(ap.a, ones).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("k-weighted terms are integrated exactly for cubic elements") {
  const Mesh m = generate_rect_mesh(2, 3, 1.0, 1.0);
  const DofMap d = build_dofmap(m, 3);
  // k = x, via omega = 1.
  const auto k = field(m, 0.5 / std::numbers::pi, [](const Point& x) { return x.x; });
  const CsrMatrix a = assemble_global(m, d, k).a;
  // u = 1: -int k^2 - i int_Gamma k = -1/3 - 2i.
  CHECK(std::abs(quad_form(a, MultiVector::Ones(d.num_dofs(), 1)) - Complex(-1.0 / 3.0, -2.0)) <= 1e-13);
  // u = x^3: int 9x^4 - int x^8 - i int_Gamma x^7 = 9/5 - 1/9 - 1.25i.
  const auto u = interpolate(d, [](const Point& x) { return Complex(x.x * x.x * x.x); });
  CHECK(std::abs(quad_form(a, u) - Complex(9.0 / 5.0 - 1.0 / 9.0, -1.25)) <= 1e-13);
}

TEST_CASE("global matrices are symmetric and the mass is positive definite") {
  const Mesh m = generate_rect_mesh(4, 3, 400.0, 300.0);
  const auto model = VelocityModel::layered({150.0}, {1500.0, 3000.0});
  const auto k = build_wavenumber(model, m, 2.0);
  for (int p = 1; p <= 3; ++p) {
    const DofMap d = build_dofmap(m, p);
    const AssembledProblem ap = assemble_global(m, d, k);
    CHECK(ap.a.is_symmetric(1e-14));
    const MultiVector dm = ap.mass.to_dense();
    CHECK((dm - dm.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * dm.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dm.real());
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    // Total area.
    CHECK(quad_form(ap.mass, MultiVector::Ones(d.num_dofs(), 1)).real() == doctest::Approx(400.0 * 300.0));
  }
}

TEST_CASE("plane wave converges at the expected order") {
  // u = exp(ikx) with k = 2 pi; the Robin datum du/dn - iku is loaded on Gamma.
  const double kk = 2.0 * std::numbers::pi;
  const auto exact = [&](const Point& x) { return std::exp(kI * kk * x.x); };
  const auto datum = [&](const Point& x, const Point& n) { return (kI * kk * n.x - kI * kk) * exact(x); };
  for (int p = 1; p <= 3; ++p) {
    std::vector<double> err;
    for (const int n : {4, 8, 16}) {
      const Mesh m = generate_rect_mesh(n, n, 1.0, 1.0);
      const DofMap d = build_dofmap(m, p);
      const AssembledProblem ap = assemble_global(m, d, field(m, 1.0, [](const Point&) { return 1.0; }));
      const MultiVector uh = factorize(ap.a).solve(boundary_load(m, d, datum));
      err.push_back(relative_errors(uh, interpolate(d, exact), &ap.mass)[0]);
    }
    const double rate = std::log2(err[1] / err[2]);
    MESSAGE("p=" << p << " errors " << err[0] << ' ' << err[1] << ' ' << err[2] << " rate " << rate);
    CHECK(err[2] < err[1]);
    CHECK(rate > p + 1 - 0.5);
  }
}

TEST_CASE("point sources") {
  const Mesh m = generate_rect_mesh(4, 3, 4.0, 3.0);
  const DofMap d1 = build_dofmap(m, 1);
  const Vertex v = 6;
  const MultiVector at_vertex = assemble_point_source(m, d1, m.vertices()[v]);
  for (Dof i = 0; i < d1.num_dofs(); ++i) CHECK(std::abs(at_vertex(i, 0) - (i == v ? 1.0 : 0.0)) <= 1e-14);

  const Element t = 5;
  const Point c = m.centroid(t);
  const MultiVector at_centroid = assemble_point_source(m, d1, c);
  for (const Dof g : d1.element(t)) CHECK(std::abs(at_centroid(g, 0) - 1.0 / 3.0) <= 1e-14);
  CHECK((at_centroid.array() != Complex(0.0)).count() == 3);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(0.0, 4.0), uy(0.0, 3.0);
  for (int p = 1; p <= 3; ++p) {
    const DofMap d = build_dofmap(m, p);
    for (int r = 0; r < 20; ++r) {
      const Point x{ux(rng), uy(rng)};
      const MultiVector s = assemble_point_source(m, d, x);
      CHECK(std::abs(s.sum() - 1.0) <= 1e-13);
      // Support lies in the containing element.
      std::array<double, 3> bary{};
      const Element host = locate(m, x, bary);
      REQUIRE(host >= 0);
      for (Dof i = 0; i < d.num_dofs(); ++i) {
        if (s(i, 0) == Complex(0.0)) continue;
        const auto el = d.element(host);
        CHECK(std::find(el.begin(), el.end(), i) != el.end());
      }
    }
  }
  CHECK_THROWS_AS(assemble_point_source(m, d1, {5.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_point_source(m, d1, {1.0, -0.1}), std::invalid_argument);
  const std::vector<Point> pts{{1.0, 1.0}, {2.5, 0.5}};
  CHECK(assemble_point_sources(m, d1, pts).cols() == 2);
}

TEST_CASE("transmission parameters") {
  CHECK_NOTHROW(TransmissionParams::zeroth().validate());
  CHECK_NOTHROW(TransmissionParams::second(1.0, 0.0).validate());
  CHECK_THROWS(TransmissionParams{0, 1.0, 0.5}.validate());
  CHECK_THROWS(TransmissionParams{1, 1.0, 0.0}.validate());
  CHECK_THROWS(TransmissionParams::zeroth(Complex(-0.1, 1.0)).validate());
}

TEST_CASE("interface operator on one edge") {
  const Mesh m = generate_rect_mesh(1, 1, 3.0, 2.0);
  const DofMap d = build_dofmap(m, 1);
  const auto k = field(m, 1.0, [](const Point&) { return 0.25; });
  const double kk = 0.5 * std::numbers::pi;
  const EdgeId e = m.find_edge(1, 3);  // right side, length 2
  const std::vector<EdgeId> edges{e};
  const double len = 2.0;

  const auto op0 = assemble_interface_operator(m, d, edges, k, TransmissionParams::zeroth());
  REQUIRE(op0.dofs.size() == 2);
  const double mref[2][2] = {{2, 1}, {1, 2}};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      CHECK(std::abs(op0.mass.coeff(r, c) - len / 6.0 * mref[r][c]) <= 1e-14);
      CHECK(std::abs(op0.s_mat.coeff(r, c) - kI * kk * len / 6.0 * mref[r][c]) <= 1e-14);
    }

  const Complex beta(0.3, -0.2);
  const auto op2 = assemble_interface_operator(m, d, edges, k, TransmissionParams::second(0.0, beta));
  // -beta/(ik) * (1/L) [[1,-1],[-1,1]]
  const Complex s = -beta / (kI * kk) / len;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(std::abs(op2.s_mat.coeff(r, c) - (r == c ? s : -s)) <= 1e-14);
  CHECK(op2.s_mat.is_symmetric());
  CHECK_THROWS(assemble_interface_operator(m, d, std::vector<EdgeId>{}, k, TransmissionParams::zeroth()));
}

TEST_CASE("tangential stiffness annihilates constants") {
  const Mesh m = generate_rect_mesh(6, 5, 6.0, 5.0);
  const auto k = field(m, 1.0, [](const Point& x) { return 0.1 + 0.01 * x.y; });
  const Partition part = partition_strips(m, 2, Axis::x);
  const auto& edges = part.interfaces().at({0, 1});
  for (int p = 1; p <= 3; ++p) {
    const DofMap d = build_dofmap(m, p);
    const auto alpha_only = assemble_interface_operator(m, d, edges, k, TransmissionParams::second(0.7, 0.0));
    const auto both = assemble_interface_operator(m, d, edges, k, TransmissionParams::second(0.7, Complex(0.5, 0.5)));
    const CsrMatrix ks = both.s_mat - alpha_only.s_mat;
    const MultiVector ones = MultiVector::Ones(ks.rows(), 1);
    CHECK(spmm(ks, ones).cwiseAbs().maxCoeff() <= 1e-13 * ks.max_abs());
    CHECK(both.s_mat.is_symmetric());
    CHECK(both.mass.is_symmetric());
  }
}

TEST_CASE("local ORAS matrices") {
  const Mesh m = generate_rect_mesh(8, 4, 800.0, 400.0);
  const auto k = build_wavenumber(VelocityModel::homogeneous(1500.0), m, 3.0);
  const DofMap d = build_dofmap(m, 2);
  const CsrMatrix a = assemble_global(m, d, k).a;
  const auto params = TransmissionParams::second(Complex(1.0, 0.2), Complex(0.4, 0.1));

  const OverlapPartition one = grow_overlap(m, partition_strips(m, 1, Axis::x));
  const LocalMatrix l1 = assemble_local_oras(m, d, one, 0, k, params);
  CHECK((l1.a - a).max_abs() == 0.0);

  const OverlapPartition ov = grow_overlap(m, partition_strips(m, 3, Axis::x));
  for (int i = 0; i < 3; ++i) {
    const LocalMatrix li = assemble_local_oras(m, d, ov, i, k, params);
    const LocalMatrix l0 = assemble_local_oras(m, d, ov, i, k, TransmissionParams::zeroth());
    CHECK(li.a.is_symmetric());
    const auto sigma = edge_set_dofs(d, ov.artificial_boundary(i));
    std::vector<char> on_sigma(static_cast<std::size_t>(d.num_dofs()), 0);
    for (const Dof g : sigma) on_sigma[g] = 1;
    std::vector<char> in_ext(static_cast<std::size_t>(d.num_dofs()), 0);
    for (const Element t : ov.extended_elements(i))
      for (const Dof g : d.element(t)) in_ext[g] = 1;
    const MultiVector da = a.to_dense();
    const MultiVector dl = li.a.to_dense();
    const MultiVector dz = l0.a.to_dense();
    for (Index r = 0; r < li.dofs.size(); ++r) {
      const Dof gr = li.dofs.local_to_global[r];
      for (Index c = 0; c < li.dofs.size(); ++c) {
        const Dof gc = li.dofs.local_to_global[c];
        if (!on_sigma[gr] || !on_sigma[gc]) CHECK(dl(r, c) == dz(r, c));
      }
      if (on_sigma[gr]) continue;
      // Interior rows of A_i are rows of A.
      for (Index c = 0; c < li.dofs.size(); ++c) CHECK(std::abs(dl(r, c) - da(gr, li.dofs.local_to_global[c])) <= 1e-12 * a.max_abs());
      for (Dof gc = 0; gc < d.num_dofs(); ++gc)
        if (!in_ext[gc]) CHECK(da(gr, gc) == Complex(0.0));
    }
  }
}

TEST_CASE("local OSM matrices") {
  const Mesh m = generate_rect_mesh(8, 4, 800.0, 400.0);
  const auto k = build_wavenumber(VelocityModel::homogeneous(1500.0), m, 3.0);
  const DofMap d = build_dofmap(m, 2);
  const CsrMatrix a = assemble_global(m, d, k).a;
  const auto params = TransmissionParams::second(Complex(1.0, 0.2), Complex(0.4, 0.1));

  const LocalOsm single = assemble_local_osm(m, d, partition_strips(m, 1, Axis::x), 0, k, params);
  CHECK((single.a - a).max_abs() == 0.0);
  CHECK(single.couplings.empty());

  const Partition part = partition_strips(m, 2, Axis::x);
  const OverlapPartition ov = grow_overlap(m, part);
  for (int i = 0; i < 2; ++i) {
    const LocalOsm lo = assemble_local_osm(m, d, part, i, k, params);
    const LocalMatrix lr = assemble_local_oras(m, d, ov, i, k, params);
    CHECK(lo.a.is_symmetric());
    REQUIRE(lo.couplings.size() == 1);
    const Coupling& cpl = lo.couplings[0];
    CHECK(cpl.neighbor == 1 - i);
    CHECK(cpl.local_index.size() == cpl.op.dofs.size());
    std::vector<char> on_sigma(static_cast<std::size_t>(d.num_dofs()), 0);
    for (const Dof g : cpl.op.dofs) on_sigma[g] = 1;

    // Away from Sigma_ij the OSM rows equal the ORAS rows.
    const MultiVector dlo = lo.a.to_dense();
    const MultiVector dlr = lr.a.to_dense();
    const MultiVector da = a.to_dense();
    for (Index r = 0; r < lo.dofs.size(); ++r) {
      const Dof gr = lo.dofs.local_to_global[r];
      for (Index c = 0; c < lo.dofs.size(); ++c) {
        const Dof gc = lo.dofs.local_to_global[c];
        if (on_sigma[gr] && on_sigma[gc]) continue;
        CHECK(std::abs(dlo(r, c) - dlr(lr.dofs.local(gr), lr.dofs.local(gc))) <= 1e-12 * a.max_abs());
      }
    }
  }
  const LocalOsm l0 = assemble_local_osm(m, d, part, 0, k, params);
  const LocalOsm l1 = assemble_local_osm(m, d, part, 1, k, params);
  // On Sigma the two volume halves sum to the global entry.
  const auto& sig = l0.couplings[0].op.dofs;
  for (std::size_t p = 0; p < sig.size(); ++p)
    for (std::size_t q = 0; q < sig.size(); ++q) {
      const Complex s = l0.couplings[0].op.s_mat.coeff(static_cast<Index>(p), static_cast<Index>(q));
      const Complex v0 = l0.a.coeff(l0.dofs.local(sig[p]), l0.dofs.local(sig[q])) + s;
      const Complex v1 = l1.a.coeff(l1.dofs.local(sig[p]), l1.dofs.local(sig[q])) + s;
      CHECK(std::abs(v0 + v1 - a.coeff(sig[p], sig[q])) <= 1e-12 * a.max_abs());
    }
}
