// SPDX-License-Identifier: Apache-2.0
//
// Grid search over transmission coefficients and residual-versus-error
// calibration curves.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddlab/krylov.hpp"
#include "ddlab/scenario.hpp"

namespace ddlab {

enum class Method { oras, osm };
const char* to_string(Method m);
Method parse_method(const std::string& name);

struct ParamGrid {
  int order = 2;
  std::vector<Complex> alpha;
  std::vector<Complex> beta;  // ignored (forced to 0) at order 0
  int budget = 0;             // max iterations per candidate; 0 keeps the solver config

  /// |alpha| in {0.5, 1, 1.5} x phase in {0, pi/8, pi/4}. At order 2, beta is
  /// 0 plus the alpha grid and its negation.
  static ParamGrid standard(int order);
  std::vector<TransmissionParams> candidates() const;
};

struct Candidate {
  TransmissionParams params;
  int iterations = 0;  // max over right-hand sides
  bool converged = false;
  std::string error;
};

struct TuningResult {
  TransmissionParams best;
  int best_iterations = 0;
  std::vector<Candidate> table;  // grid order
};

/// Iteration count of one method on the problem's sources.
Candidate evaluate_params(const Problem& problem, Method method, const TransmissionParams& params,
                          const KrylovConfig& cfg);

inline constexpr Index kTuningDofCap = 200000;

/// Fewest iterations wins; ties go to smaller |beta|, then smaller phase of
/// beta in [0, 2pi), then smaller phase of alpha, then smaller |alpha|, then
/// grid order. Each candidate runs at most as many iterations as the best so
/// far; longer runs are recorded as "pruned at N". Throws std::runtime_error
/// when no candidate converges.
TuningResult optimize_params(const Problem& problem, Method method, const ParamGrid& grid, const KrylovConfig& cfg);

struct CalibrationPoint {
  int iteration;
  double residual;  // as in the solver's history
  double error;     // relative L2 error of the volume field
};

struct CalibrationCurve {
  std::string label;
  std::vector<CalibrationPoint> points;
};

/// Single-column run down to `tol_floor`, recording the L2 error of every
/// iterate against `reference`.
CalibrationCurve calibrate_criterion(const Problem& problem, Method method, const TransmissionParams& params,
                                     double tol_floor, const MultiVector& source, const MultiVector& reference,
                                     int restart = 50, int max_iters = 2000);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
/// Error at the first point whose residual is <= r; NaN when never reached.
double error_at_residual(const CalibrationCurve& curve, double r);

/// CSV "candidate,order,alpha_re,alpha_im,beta_re,beta_im,iterations,converged,error".
void write_tuning_csv(const TuningResult& result, std::ostream& out);
/// CSV "iteration,residual,error".
void write_calibration_csv(const CalibrationCurve& curve, std::ostream& out);

}  // namespace ddlab
