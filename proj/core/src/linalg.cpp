// SPDX-License-Identifier: Apache-2.0

#include "ddlab/linalg.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ddlab {

const char* to_string(CostCategory c) {
  switch (c) {
    case CostCategory::spmm: return "spmm";
    case CostCategory::local_solve: return "local_solve";
    case CostCategory::orthogonalization: return "orthogonalization";
    case CostCategory::exchange: return "exchange";
  }
  return "unknown";
}

CostCounters::CostCounters(const CostCounters& other) { *this = other; }

CostCounters& CostCounters::operator=(const CostCounters& other) {
  for (std::size_t i = 0; i < kCostCategoryCount; ++i) {
    nanos_[i].store(other.nanos_[i].load());
    calls_[i].store(other.calls_[i].load());
  }
  return *this;
}

void CostCounters::add(CostCategory c, std::chrono::nanoseconds elapsed) {
  const auto i = static_cast<std::size_t>(c);
  nanos_[i].fetch_add(std::max<std::int64_t>(0, elapsed.count()));
  calls_[i].fetch_add(1);
}

double CostCounters::seconds(CostCategory c) const {
  return 1e-9 * static_cast<double>(nanos_[static_cast<std::size_t>(c)].load());
}

std::int64_t CostCounters::calls(CostCategory c) const {
  return calls_[static_cast<std::size_t>(c)].load();
}

void CostCounters::reset() {
  for (std::size_t i = 0; i < kCostCategoryCount; ++i) {
    nanos_[i].store(0);
    calls_[i].store(0);
  }
}

ScopedTimer::ScopedTimer(CostCounters* counters, CostCategory category)
    : counters_(counters), category_(category), start_(std::chrono::steady_clock::now()) {}

ScopedTimer::~ScopedTimer() {
  if (counters_ != nullptr) {
    counters_->add(category_, std::chrono::duration_cast<std::chrono::nanoseconds>(
                                  std::chrono::steady_clock::now() - start_));
  }
}

// ---------------------------------------------------------------------------
// CsrMatrix

CsrMatrix::CsrMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {
  if (rows < 0 || cols < 0) throw LinalgError("CsrMatrix: negative dimension");
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols, std::span<const Triplet> entries) {
  CsrMatrix m(rows, cols);
  std::vector<Index> count(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      std::ostringstream msg;
      msg << "CsrMatrix: triplet (" << t.row << ", " << t.col << ") outside " << rows << "x" << cols;
      throw LinalgError(msg.str());
    }
    ++count[static_cast<std::size_t>(t.row) + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by row, then sort and merge each row.
  std::vector<std::pair<Index, Complex>> bucket(entries.size());
  std::vector<Index> fill(count.begin(), count.end() - 1);
  for (const auto& t : entries) bucket[static_cast<std::size_t>(fill[t.row]++)] = {t.col, t.value};

  m.indices_.reserve(entries.size());
  m.values_.reserve(entries.size());
  for (Index r = 0; r < rows; ++r) {
    auto first = bucket.begin() + count[r];
    auto last = bucket.begin() + count[r + 1];
    std::sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last; ++it) {
      if (!m.indices_.empty() && static_cast<Index>(m.indices_.size()) > m.offsets_[r] &&
          m.indices_.back() == it->first) {
        m.values_.back() += it->second;
      } else {
        m.indices_.push_back(it->first);
        m.values_.push_back(it->second);
      }
    }
    m.offsets_[r + 1] = static_cast<Index>(m.indices_.size());
  }
  return m;
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  auto m = from_triplets(n, n, t);
  m.symmetric_ = true;
  return m;
}

CsrMatrix CsrMatrix::from_dense(const MultiVector& dense, double drop_tol) {
  std::vector<Triplet> t;
  for (Index r = 0; r < dense.rows(); ++r)
    for (Index c = 0; c < dense.cols(); ++c)
      if (std::abs(dense(r, c)) > drop_tol) t.push_back({r, c, dense(r, c)});
  return from_triplets(dense.rows(), dense.cols(), t);
}

Complex CsrMatrix::coeff(Index row, Index col) const {
  const auto first = indices_.begin() + offsets_[row];
  const auto last = indices_.begin() + offsets_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool CsrMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  const double bound = rel_tol * max_abs();
  for (Index r = 0; r < rows_; ++r)
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
      if (std::abs(values_[k] - coeff(indices_[k], r)) > bound) return false;
  return true;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r)
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) t.push_back({indices_[k], r, values_[k]});
  auto m = from_triplets(cols_, rows_, t);
  m.symmetric_ = symmetric_;
  return m;
}

CsrMatrix CsrMatrix::principal_submatrix(std::span<const Index> selection) const {
  std::vector<Index> position(static_cast<std::size_t>(cols_), -1);
  for (std::size_t i = 0; i < selection.size(); ++i) position[selection[i]] = static_cast<Index>(i);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    const Index r = selection[i];
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
      if (position[indices_[k]] >= 0) t.push_back({static_cast<Index>(i), position[indices_[k]], values_[k]});
  }
  const auto n = static_cast<Index>(selection.size());
  auto m = from_triplets(n, n, t);
  m.symmetric_ = symmetric_;
  return m;
}

MultiVector CsrMatrix::to_dense() const {
  MultiVector d = MultiVector::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r)
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) d(r, indices_[k]) += values_[k];
  return d;
}

Eigen::SparseMatrix<Complex, Eigen::ColMajor, int> CsrMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<Complex, int>> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r)
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
      t.emplace_back(static_cast<int>(r), static_cast<int>(indices_[k]), values_[k]);
  Eigen::SparseMatrix<Complex, Eigen::ColMajor, int> m(rows_, cols_);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void CsrMatrix::write_triplets(std::ostream& out) const {
  const auto old = out.precision(17);
  for (Index r = 0; r < rows_; ++r)
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
      out << r << ' ' << indices_[k] << ' ' << values_[k].real() << ' ' << values_[k].imag() << '\n';
  out.precision(old);
}

namespace {

CsrMatrix combine(const CsrMatrix& a, const CsrMatrix& b, Complex sb) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw LinalgError("CsrMatrix: shape mismatch in sum");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonzeros() + b.nonzeros()));
  for (int which = 0; which < 2; ++which) {
    const CsrMatrix* m = which == 0 ? &a : &b;
    const Complex s = which == 0 ? Complex(1.0) : sb;
    const auto off = m->row_offsets();
    const auto idx = m->col_indices();
    const auto val = m->values();
    for (Index r = 0; r < m->rows(); ++r)
      for (Index k = off[r]; k < off[r + 1]; ++k) t.push_back({r, idx[k], s * val[k]});
  }
  auto out = CsrMatrix::from_triplets(a.rows(), a.cols(), t);
  out.set_symmetric(a.symmetric() && b.symmetric());
  return out;
}

}  // namespace

CsrMatrix CsrMatrix::operator+(const CsrMatrix& other) const { return combine(*this, other, 1.0); }
CsrMatrix CsrMatrix::operator-(const CsrMatrix& other) const { return combine(*this, other, -1.0); }

CsrMatrix CsrMatrix::operator*(Complex scale) const {
  CsrMatrix m = *this;
  for (auto& v : m.values_) v *= scale;
  return m;
}

// ---------------------------------------------------------------------------
// Products

MultiVector spmm(const CsrMatrix& a, const MultiVector& x, CostCounters* counters) {
  if (a.cols() != x.rows()) {
    std::ostringstream msg;
    msg << "spmm: matrix is " << a.rows() << "x" << a.cols() << ", batch has " << x.rows() << " rows";
    throw LinalgError(msg.str());
  }
  ScopedTimer timer(counters, CostCategory::spmm);
  const auto off = a.row_offsets();
  const auto idx = a.col_indices();
  const auto val = a.values();
  const Index width = x.cols();
  if (width == 1) {
    MultiVector y(a.rows(), 1);
    for (Index r = 0; r < a.rows(); ++r) {
      Complex s = 0.0;
      for (Index k = off[r]; k < off[r + 1]; ++k) s += val[k] * x(idx[k], 0);
      y(r, 0) = s;
    }
    return y;
  }
  // Row-major staging keeps each row of the batch contiguous.
  using RowBatch = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowBatch xr = x;
  RowBatch yr = RowBatch::Zero(a.rows(), width);
  for (Index r = 0; r < a.rows(); ++r)
    for (Index k = off[r]; k < off[r + 1]; ++k) yr.row(r) += val[k] * xr.row(idx[k]);
  return MultiVector(yr);
}

// ---------------------------------------------------------------------------
// Factorization

using EigenSparse = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using EigenLu = Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>>;

struct Factorization::Impl {
  EigenLu lu;
};

Factorization::Factorization() = default;
Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Factorization factorize(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw LinalgError("factorize: matrix is not square");
  Factorization f;
  f.size_ = a.rows();
  f.impl_ = std::make_unique<Factorization::Impl>();
  if (a.rows() == 0) return f;

  // Structurally empty rows/columns are reported before the numeric phase.
  std::vector<char> col_seen(static_cast<std::size_t>(a.cols()), 0);
  const auto off = a.row_offsets();
  const auto idx = a.col_indices();
  const auto val = a.values();
  for (Index r = 0; r < a.rows(); ++r) {
    bool any = false;
    for (Index k = off[r]; k < off[r + 1]; ++k) {
      if (val[k] != Complex(0.0)) {
        any = true;
        col_seen[idx[k]] = 1;
      }
    }
    if (!any) {
      std::ostringstream msg;
      msg << "factorize: structurally singular, empty row " << r;
      throw LinalgError(msg.str());
    }
  }
  for (Index c = 0; c < a.cols(); ++c) {
    if (col_seen[c] == 0) {
      std::ostringstream msg;
      msg << "factorize: structurally singular, empty column " << c;
      throw LinalgError(msg.str());
    }
  }

  const EigenSparse m = a.to_eigen();
  auto& lu = f.impl_->lu;
  lu.isSymmetric(a.symmetric());
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) {
    throw LinalgError("factorize: singular matrix (" + lu.lastErrorMessage() + ")");
  }
  // Partial pivoting only stops on exact zeros; a zero determinant magnitude
  // also catches underflowed pivots.
  const double log_det = std::real(lu.logAbsDeterminant());
  if (!std::isfinite(log_det)) throw LinalgError("factorize: numerically singular matrix (zero pivot)");

  // Both supernodal counts include the diagonal; keep it once.
  f.factor_nonzeros_ = static_cast<Index>(lu.nnzL()) - a.rows() + static_cast<Index>(lu.nnzU());
  // Input copy, row/column permutations, factor index arrays, panel buffers.
  const auto n = static_cast<std::size_t>(a.rows());
  f.workspace_bytes_ = 20 * static_cast<std::size_t>(a.nonzeros()) + 16 * n +
                       4 * static_cast<std::size_t>(f.factor_nonzeros_) + 16 * 16 * n;
  return f;
}

MultiVector Factorization::solve(const MultiVector& b) const {
  if (b.rows() != size_) {
    std::ostringstream msg;
    msg << "solve: factorization of size " << size_ << ", batch has " << b.rows() << " rows";
    throw LinalgError(msg.str());
  }
  if (b.cols() == 0 || size_ == 0) return MultiVector::Zero(b.rows(), b.cols());
  MultiVector x = impl_->lu.solve(b);
  return x;
}

MultiVector solve_batch(const Factorization& f, const MultiVector& b, CostCounters* counters) {
  ScopedTimer timer(counters, CostCategory::local_solve);
  return f.solve(b);
}

// ---------------------------------------------------------------------------
// Norms

std::vector<double> norms(const MultiVector& x, const CsrMatrix* mass) {
  if (!x.allFinite()) throw LinalgError("norms: non-finite entries in input");
  std::vector<double> out(static_cast<std::size_t>(x.cols()), 0.0);
  if (mass == nullptr) {
    for (Index j = 0; j < x.cols(); ++j) out[j] = x.col(j).norm();
    return out;
  }
  if (mass->rows() != x.rows() || mass->cols() != x.rows()) throw LinalgError("norms: mass matrix shape mismatch");
  const MultiVector mx = spmm(*mass, x);
  for (Index j = 0; j < x.cols(); ++j) {
    const Complex q = x.col(j).dot(mx.col(j));  // conjugates the first argument
    out[j] = std::sqrt(std::max(0.0, q.real()));
  }
  return out;
}

std::vector<double> relative_errors(const MultiVector& x, const MultiVector& ref, const CsrMatrix* mass) {
  if (x.rows() != ref.rows() || x.cols() != ref.cols()) throw LinalgError("relative_errors: shape mismatch");
  const MultiVector diff = x - ref;
  const auto num = norms(diff, mass);
  const auto den = norms(ref, mass);
  std::vector<double> out(num.size());
  for (std::size_t j = 0; j < num.size(); ++j) out[j] = den[j] > 0.0 ? num[j] / den[j] : num[j];
  return out;
}

}  // namespace ddlab
