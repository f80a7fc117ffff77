// SPDX-License-Identifier: Apache-2.0
//
// Complex sparse and dense kernels: CSR storage, batched sparse products,
// sparse direct factorization with multi-column triangular solves, norms,
// and the per-category cost counters every solver reports into.

#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ddlab {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Dense column batch; one column per right-hand side.
using MultiVector = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cost centers of a multi-RHS iterative solve.
enum class CostCategory : int { spmm = 0, local_solve = 1, orthogonalization = 2, exchange = 3 };
inline constexpr std::size_t kCostCategoryCount = 4;

const char* to_string(CostCategory c);

/// Wall-clock accumulators, one per cost category. Safe to update from
/// several threads; totals only ever grow until reset().
class CostCounters {
 public:
  CostCounters() = default;
  CostCounters(const CostCounters& other);
  CostCounters& operator=(const CostCounters& other);

  void add(CostCategory c, std::chrono::nanoseconds elapsed);
  double seconds(CostCategory c) const;
  std::int64_t calls(CostCategory c) const;
  void reset();

 private:
  std::array<std::atomic<std::int64_t>, kCostCategoryCount> nanos_{};
  std::array<std::atomic<std::int64_t>, kCostCategoryCount> calls_{};
};

/// Adds the lifetime of the timer to one category. A null counter set is a no-op.
class ScopedTimer {
 public:
  ScopedTimer(CostCounters* counters, CostCategory category);
  ~ScopedTimer();
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  CostCounters* counters_;
  CostCategory category_;
  std::chrono::steady_clock::time_point start_;
};

struct Triplet {
  Index row;
  Index col;
  Complex value;
};

/// Compressed sparse row matrix with complex entries. Column indices are
/// sorted within each row and unique.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols);

  /// Duplicates are summed; explicit zeros produced by cancellation are kept.
  static CsrMatrix from_triplets(Index rows, Index cols, std::span<const Triplet> entries);
  static CsrMatrix identity(Index n);
  static CsrMatrix from_dense(const MultiVector& dense, double drop_tol = 0.0);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nonzeros() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_offsets() const { return offsets_; }
  std::span<const Index> col_indices() const { return indices_; }
  std::span<const Complex> values() const { return values_; }

  Complex coeff(Index row, Index col) const;

  /// max|A - A^T| <= rel_tol * max|A|. Plain transpose, not conjugate.
  bool is_symmetric(double rel_tol = 1e-14) const;
  double max_abs() const;

  bool symmetric() const { return symmetric_; }
  void set_symmetric(bool flag) { symmetric_ = flag; }

  CsrMatrix transpose() const;
  /// Rows and columns selected by the same index list, in list order.
  CsrMatrix principal_submatrix(std::span<const Index> selection) const;

  MultiVector to_dense() const;
  Eigen::SparseMatrix<Complex, Eigen::ColMajor, int> to_eigen() const;

  /// Coordinate text export: "row col re im" per line, zero-based.
  void write_triplets(std::ostream& out) const;

  CsrMatrix operator+(const CsrMatrix& other) const;
  CsrMatrix operator-(const CsrMatrix& other) const;
  CsrMatrix operator*(Complex scale) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Index> indices_;
  std::vector<Complex> values_;
  bool symmetric_ = false;
};

/// Y = A X, batched over the columns of X.
MultiVector spmm(const CsrMatrix& a, const MultiVector& x, CostCounters* counters = nullptr);

/// Sparse LU with partial pivoting over a fill-reducing column ordering.
/// Immutable once built; solves may run concurrently.
class Factorization {
 public:
  Factorization();
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  Index size() const { return size_; }
  /// Nonzeros stored in L and U (unit diagonal of L not counted).
  Index factor_nonzeros() const { return factor_nonzeros_; }
  /// Bytes of factor storage at 16 B per scalar.
  std::size_t factor_bytes() const { return 16 * static_cast<std::size_t>(factor_nonzeros_); }
  /// Factor storage plus symbolic/numeric workspace held during factorization.
  std::size_t peak_bytes() const { return factor_bytes() + workspace_bytes_; }
  std::size_t workspace_bytes() const { return workspace_bytes_; }

  MultiVector solve(const MultiVector& b) const;

 private:
  friend Factorization factorize(const CsrMatrix& a);
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Index size_ = 0;
  Index factor_nonzeros_ = 0;
  std::size_t workspace_bytes_ = 0;
};

/// Throws LinalgError for non-square, structurally or numerically singular input.
Factorization factorize(const CsrMatrix& a);

/// Solves every column of B against the same factors in one pass.
MultiVector solve_batch(const Factorization& f, const MultiVector& b, CostCounters* counters = nullptr);

/// Per-column norms: Euclidean, or sqrt(x^H M x) when a mass matrix is given.
/// Throws LinalgError on non-finite entries.
std::vector<double> norms(const MultiVector& x, const CsrMatrix* mass = nullptr);

/// Per-column ||x - ref|| / ||ref|| in the same norm; 0/0 is reported as 0.
std::vector<double> relative_errors(const MultiVector& x, const MultiVector& ref,
                                    const CsrMatrix* mass = nullptr);

}  // namespace ddlab
