#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "ddlab/krylov.hpp"

using namespace ddlab;

namespace {

MultiVector random_dense(Index r, Index c, std::mt19937& rng) {
  std::normal_distribution<double> n;
  MultiVector m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

LinearOperator dense_operator(const MultiVector& a) {
  return {a.rows(), [a](const MultiVector& x, CostCounters*) { return MultiVector(a * x); }, CostCategory::spmm};
}

MultiVector diag_dominant(Index n, std::mt19937& rng) {
  MultiVector a = random_dense(n, n, rng) * 0.5 / std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < n; ++i) a(i, i) += Complex(3.0, 1.0);
  return a;
}

// min over the j-dimensional Krylov space of ||b - A y|| / ||b||, from an
// explicit orthonormalized Krylov matrix.
double minimal_residual(const MultiVector& a, const MultiVector& b, int j) {
  MultiVector k(b.rows(), j);
  MultiVector v = b / b.norm();
  for (int q = 0; q < j; ++q) {
    k.col(q) = v;
    v = a * v;
    v /= v.norm();
  }
  const Eigen::HouseholderQR<MultiVector> qr(a * k);
  const MultiVector q = qr.householderQ() * MultiVector::Identity(b.rows(), j);
  return (b - q * (q.adjoint() * b)).norm() / b.norm();
}

}  // namespace

TEST_CASE("identity operator converges in one iteration") {
  std::mt19937 rng(1);
  const MultiVector b = random_dense(10, 3, rng);
  const auto r = pblock_gmres(dense_operator(MultiVector::Identity(10, 10)), nullptr, b, {});
  CHECK((r.x - b).cwiseAbs().maxCoeff() <= 1e-14);
  for (int c = 0; c < 3; ++c) {
    CHECK(r.stats.iterations[c] == 1);
    CHECK(r.stats.status[c] == ColumnStatus::converged);
  }
  CHECK(r.stats.all_converged());
  CHECK(r.stats.max_iterations() == 1);
}

TEST_CASE("dense diagonally dominant system") {
  std::mt19937 rng(2);
  const MultiVector a = diag_dominant(50, rng);
  const MultiVector b = random_dense(50, 4, rng);
  KrylovConfig cfg;
  cfg.tol = 1e-10;
  const auto r = pblock_gmres(dense_operator(a), nullptr, b, cfg);
  const MultiVector ref = a.partialPivLu().solve(b);
  const Eigen::JacobiSVD<MultiVector> svd(a);
  const double cond = svd.singularValues()(0) / svd.singularValues()(49);
  for (Index c = 0; c < 4; ++c) {
    CHECK((r.x.col(c) - ref.col(c)).norm() <= 10 * cfg.tol * cond * ref.col(c).norm());
    CHECK(r.stats.final_residuals[c] <= cfg.tol);
    // Recurrence and true residual agree.
    CHECK(r.stats.histories[c].back() <= cfg.tol);
    CHECK(r.stats.final_residuals[c] <= 10 * cfg.tol);
  }
  CHECK(r.stats.vector_length == 50);
  CHECK(r.stats.width == 4);
  CHECK(r.stats.krylov_bytes == 50u * 4u * 51u * 16u);
}

TEST_CASE("recurrence residuals match the minimal residual over the Krylov space") {
  std::mt19937 rng(3);
  const Index n = 14;
  MultiVector a = random_dense(n, n, rng);
  a += MultiVector::Identity(n, n) * Complex(1.5, 0.0);
  a = (a + a.transpose()).eval();  // complex symmetric, indefinite
  const MultiVector b = random_dense(n, 1, rng);
  KrylovConfig cfg;
  cfg.tol = 1e-13;
  cfg.restart = static_cast<int>(n);
  const auto r = pblock_gmres(dense_operator(a), nullptr, b, cfg);
  const auto& h = r.stats.histories[0];
  CHECK(h.front() == 1.0);
  for (std::size_t j = 1; j < h.size() && j <= 8; ++j)
    CHECK(h[j] == doctest::Approx(minimal_residual(a, b, static_cast<int>(j))).epsilon(1e-8));
  // Within one cycle the residual never grows, and GMRES terminates within n steps.
  for (std::size_t j = 1; j < h.size(); ++j) CHECK(h[j] <= h[j - 1] * (1 + 1e-12));
  CHECK(r.stats.iterations[0] <= n);
  CHECK(r.stats.status[0] == ColumnStatus::converged);
}

TEST_CASE("right preconditioning") {
  std::mt19937 rng(4);
  const MultiVector a = diag_dominant(30, rng);
  const MultiVector inv = a.inverse();
  const LinearOperator op = dense_operator(a), pre = dense_operator(inv);
  const MultiVector b = random_dense(30, 2, rng);
  const auto r = pblock_gmres(op, &pre, b, {});
  CHECK(r.stats.max_iterations() == 1);
  CHECK((a * r.x - b).norm() <= 1e-12 * b.norm());

  // A poor preconditioner still returns x, not y.
  const MultiVector jac = a.diagonal().cwiseInverse().asDiagonal();
  const LinearOperator pj = dense_operator(jac);
  KrylovConfig cfg;
  cfg.tol = 1e-10;
  const auto rj = pblock_gmres(op, &pj, b, cfg);
  CHECK((a * rj.x - b).norm() <= 1e-9 * b.norm());
}

TEST_CASE("restarts, stagnation and iteration caps") {
  std::mt19937 rng(5);
  // GMRES(1) cannot reduce the residual of a rotation.
  MultiVector rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  MultiVector e1 = MultiVector::Zero(2, 1);
  e1(0, 0) = 1.0;
  KrylovConfig one;
  one.restart = 1;
  const auto s = pblock_gmres(dense_operator(rot), nullptr, e1, one);
  CHECK(s.stats.status[0] == ColumnStatus::stagnated);
  CHECK(s.stats.iterations[0] == 1);

  const MultiVector a = diag_dominant(40, rng);
  const MultiVector b = random_dense(40, 2, rng);
  KrylovConfig capped;
  capped.tol = 1e-14;
  capped.max_iters = 3;
  const auto c = pblock_gmres(dense_operator(a), nullptr, b, capped);
  for (int q = 0; q < 2; ++q) {
    CHECK(c.stats.status[q] == ColumnStatus::max_iters);
    CHECK(c.stats.iterations[q] == 3);
  }
  CHECK(std::string(to_string(ColumnStatus::max_iters)) == "max_iters");

  KrylovConfig small;
  small.restart = 4;
  small.tol = 1e-10;
  const auto rs = pblock_gmres(dense_operator(a), nullptr, b, small);
  CHECK(rs.stats.all_converged());
  CHECK(rs.stats.max_iterations() > 4);
  CHECK((a * rs.x - b).norm() <= 1e-9 * b.norm());
}

TEST_CASE("zero columns and loose tolerances") {
  std::mt19937 rng(6);
  const MultiVector a = diag_dominant(20, rng);
  MultiVector b = random_dense(20, 3, rng);
  b.col(1).setZero();
  const auto r = pblock_gmres(dense_operator(a), nullptr, b, {});
  CHECK(r.stats.iterations[1] == 0);
  CHECK(r.stats.histories[1] == std::vector<double>{0.0});
  CHECK(r.x.col(1).norm() == 0.0);
  CHECK(r.stats.iterations[0] > 0);

  KrylovConfig loose;
  loose.tol = 1.0;
  const auto l = pblock_gmres(dense_operator(a), nullptr, b, loose);
  CHECK(l.stats.max_iterations() == 0);
  CHECK(l.stats.all_converged());
}

TEST_CASE("pseudo-block runs equal sequential runs") {
  std::mt19937 rng(7);
  MultiVector a = random_dense(80, 80, rng) * (0.6 / std::sqrt(80.0));
  for (Index i = 0; i < 80; ++i) a(i, i) += Complex(1.0 + 0.02 * i, 0.3);
  const MultiVector b = random_dense(80, 8, rng);
  KrylovConfig cfg;
  cfg.tol = 1e-7;
  cfg.restart = 10;
  const auto block = pblock_gmres(dense_operator(a), nullptr, b, cfg);
  CHECK(block.stats.all_converged());
  CHECK(block.stats.max_iterations() > cfg.restart);
  KrylovConfig split = cfg;
  split.batch = 3;
  const auto chunks = pblock_gmres(dense_operator(a), nullptr, b, split);
  CHECK(chunks.stats.width == 3);
  for (Index c = 0; c < 8; ++c) {
    const auto single = pblock_gmres(dense_operator(a), nullptr, b.col(c), cfg);
    for (const auto* other : {&block, &chunks}) {
      CHECK(other->stats.iterations[c] == single.stats.iterations[0]);
      REQUIRE(other->stats.histories[c].size() == single.stats.histories[0].size());
      for (std::size_t j = 0; j < single.stats.histories[0].size(); ++j)
        CHECK(std::abs(other->stats.histories[c][j] - single.stats.histories[0][j]) <=
              1e-8 * single.stats.histories[0][j]);
      CHECK((other->x.col(c) - single.x).norm() <= 1e-10 * single.x.norm());
    }
  }
}

TEST_CASE("observer sees every iterate") {
  std::mt19937 rng(8);
  const MultiVector a = diag_dominant(25, rng);
  const MultiVector b = random_dense(25, 2, rng);
  KrylovConfig cfg;
  cfg.tol = 1e-8;
  cfg.restart = 5;
  std::vector<int> seen(2, 0);
  const auto r = pblock_gmres(dense_operator(a), nullptr, b, cfg, [&](Index c, int it, double res, const MultiVector& x) {
    CHECK(it == ++seen[c]);
    CHECK((b.col(c) - a * x).norm() / b.col(c).norm() == doctest::Approx(res).epsilon(1e-6));
  });
  CHECK(seen[0] == r.stats.iterations[0]);
  CHECK(seen[1] == r.stats.iterations[1]);
}

TEST_CASE("operator counters and errors") {
  std::mt19937 rng(9);
  KrylovConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS(bad.validate());
  bad = {};
  bad.restart = 0;
  CHECK_THROWS(bad.validate());
  const CsrMatrix a = CsrMatrix::from_dense(diag_dominant(15, rng));
  const LinearOperator op = matrix_operator(a);
  CHECK(op.size == 15);
  CHECK_THROWS_AS(pblock_gmres(op, nullptr, random_dense(14, 1, rng), {}), LinalgError);
  const auto r = pblock_gmres(op, nullptr, random_dense(15, 2, rng), {});
  CHECK(r.stats.counters.calls(CostCategory::spmm) > 0);
  CHECK(r.stats.counters.calls(CostCategory::orthogonalization) > 0);
  CHECK(r.stats.wall_seconds >= 0.0);
}

TEST_CASE("richardson") {
  std::mt19937 rng(10);
  const MultiVector b = random_dense(6, 2, rng);
  const auto scaled = [](double s) {
    return LinearOperator{6, [s](const MultiVector& x, CostCounters*) { return MultiVector(s * x); }, CostCategory::spmm};
  };
  const auto zero = richardson(scaled(0.0), b, 3);
  REQUIRE(zero.iterates.size() == 4);
  CHECK(zero.iterates[0].norm() == 0.0);
  for (int m = 1; m <= 3; ++m) CHECK(zero.iterates[m] == b);

  const auto half = richardson(scaled(0.5), b, 40);
  for (int m = 0; m <= 40; ++m) {
    const double f = 2.0 - std::pow(2.0, 1 - m);
    CHECK((half.iterates[m] - f * b).norm() <= 1e-14 * b.norm());
  }
  CHECK_FALSE(half.diverged);

  const auto blow = richardson(scaled(3.0), b, 100);
  CHECK(blow.diverged);
  CHECK(blow.iterates.size() < 101);
  CHECK(richardson(scaled(0.5), b, 0).iterates.size() == 1);
  CHECK_THROWS(richardson(scaled(0.5), b, -1));
}

TEST_CASE("history csv") {
  RunStats s;
  s.histories = {{1.0, 0.5, 0.25}, {0.0}};
  std::ostringstream out;
  write_histories(s, out);
  CHECK(out.str() == "iteration,rhs0,rhs1\n0,1,0\n1,0.5,\n2,0.25,\n");
}
