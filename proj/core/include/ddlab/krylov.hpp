// SPDX-License-Identifier: Apache-2.0
//
// Restarted pseudo-block GMRES (independent recurrences per right-hand side,
// batched operator applications) and the Richardson fixed-point iteration.

#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddlab/linalg.hpp"

namespace ddlab {

/// Linear map on batches. `apply` records its own costs into the counters it
/// is handed (which may be null); `category` names its dominant cost.
struct LinearOperator {
  Index size = 0;
  std::function<MultiVector(const MultiVector&, CostCounters*)> apply;
  CostCategory category = CostCategory::spmm;
};

/// Y = A X through spmm.
LinearOperator matrix_operator(const CsrMatrix& a);

struct KrylovConfig {
  double tol = 1e-4;    // relative residual
  int restart = 50;     // basis size per cycle
  int max_iters = 1000; // per right-hand side
  int batch = 0;        // columns per pseudo-block run; 0 means all

  void validate() const;
};

enum class ColumnStatus { converged, max_iters, stagnated };
const char* to_string(ColumnStatus s);

struct RunStats {
  /// Relative recurrence residual per iteration, starting with the initial 1.
  std::vector<std::vector<double>> histories;
  std::vector<int> iterations;
  std::vector<ColumnStatus> status;
  /// True relative residual ||b - op(x)|| / ||b|| at exit.
  std::vector<double> final_residuals;
  CostCounters counters;
  double wall_seconds = 0.0;
  /// n * width * (restart + 1) * 16 for the widest batch.
  std::size_t krylov_bytes = 0;
  Index vector_length = 0;
  int width = 0;

  bool all_converged() const;
  int max_iterations() const;
};

/// Called after every iteration with the current iterate of one column.
using IterateObserver = std::function<void(Index column, int iteration, double residual, const MultiVector& x)>;

struct GmresResult {
  MultiVector x;
  RunStats stats;
};

/// Solves op(x) = b per column, starting from x = 0. With a preconditioner the
/// iteration runs on op(precond(y)) = b and returns x = precond(y).
GmresResult pblock_gmres(const LinearOperator& op, const LinearOperator* precond, const MultiVector& b,
                         const KrylovConfig& cfg, const IterateObserver& observer = {});

struct RichardsonResult {
  std::vector<MultiVector> iterates;  // g^0 = 0, g^1, ..., g^m
  bool diverged = false;
};

/// g^{m+1} = T g^m + b from g^0 = 0. Stops early, flagging divergence, once
/// a column norm exceeds 1e6 times the largest column norm of b.
RichardsonResult richardson(const LinearOperator& t, const MultiVector& b, int iters, CostCounters* counters = nullptr);

/// CSV: iteration followed by one residual column per right-hand side; cells
/// past a column's last iteration are left empty.
void write_histories(const RunStats& stats, std::ostream& out);

}  // namespace ddlab
