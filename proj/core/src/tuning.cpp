// SPDX-License-Identifier: Apache-2.0

#include "ddlab/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ddlab/oras.hpp"
#include "ddlab/osm.hpp"

namespace ddlab {

const char* to_string(Method m) { return m == Method::oras ? "oras" : "osm"; }

Method parse_method(const std::string& name) {
  if (name == "oras") return Method::oras;
  if (name == "osm") return Method::osm;
  throw std::invalid_argument("unknown method '" + name + "'");
}

ParamGrid ParamGrid::standard(int order) {
  ParamGrid g;
  g.order = order;
  for (const double mag : {0.5, 1.0, 1.5})
    for (const double phase : {0.0, std::numbers::pi / 8, std::numbers::pi / 4}) g.alpha.push_back(std::polar(mag, phase));
  g.beta = {0.0};
  if (order == 2) {
    g.beta.insert(g.beta.end(), g.alpha.begin(), g.alpha.end());
    for (const Complex a : g.alpha) g.beta.push_back(-a);
  }
  return g;
}

std::vector<TransmissionParams> ParamGrid::candidates() const {
  if (alpha.empty()) throw std::invalid_argument("ParamGrid: empty alpha grid");
  std::vector<TransmissionParams> out;
  if (order == 0) {
    for (const Complex a : alpha) out.push_back(TransmissionParams::zeroth(a));
    return out;
  }
  if (beta.empty()) throw std::invalid_argument("ParamGrid: empty beta grid");
  for (const Complex b : beta)
    for (const Complex a : alpha) out.push_back(TransmissionParams::second(a, b));
  return out;
}

Candidate evaluate_params(const Problem& problem, Method method, const TransmissionParams& params,
                          const KrylovConfig& cfg) {
  Candidate c;
  c.params = params;
  try {
    RunStats stats;
    if (method == Method::oras) {
      const OrasContext ctx = build_oras(problem.mesh(), problem.dofs(), problem.overlap(), problem.k(), params, problem.a());
      stats = solve_oras(ctx, problem.sources(), cfg).stats;
    } else {
      const OsmContext ctx = build_osm(problem.mesh(), problem.dofs(), problem.partition(), problem.k(), params);
      stats = solve_osm(ctx, problem.sources(), cfg).stats;
    }
    c.iterations = stats.max_iterations();
    c.converged = stats.all_converged();
    if (!c.converged) {
      for (const auto s : stats.status)
        if (s != ColumnStatus::converged) c.error = to_string(s);
    }
  } catch (const std::exception& e) {
    c.error = e.what();
  }
  return c;
}

TuningResult optimize_params(const Problem& problem, Method method, const ParamGrid& grid, const KrylovConfig& cfg) {
  if (problem.dofs().num_dofs() > kTuningDofCap) throw std::invalid_argument("optimize_params: problem exceeds the desk-scale DOF cap");
  KrylovConfig run = cfg;
  if (grid.budget > 0) run.max_iters = std::min(run.max_iters, grid.budget);
  TuningResult result;
  // A candidate needing more iterations than the best so far cannot win, so
  // its run is cut there and recorded as pruned.
  int cap = run.max_iters;
  for (const auto& p : grid.candidates()) {
    KrylovConfig c = run;
    c.max_iters = cap;
    Candidate cand = evaluate_params(problem, method, p, c);
    if (cand.converged) cap = std::min(cap, cand.iterations);
    else if (cand.error == to_string(ColumnStatus::max_iters) && c.max_iters < run.max_iters)
      cand.error = "pruned at " + std::to_string(c.max_iters);
    result.table.push_back(std::move(cand));
  }
  const auto phase = [](Complex z) {
    const double a = std::arg(z);
    return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
  };
  const auto key = [&](std::size_t i) {
    const auto& c = result.table[i];
    return std::make_tuple(c.iterations, std::abs(c.params.beta_hat), phase(c.params.beta_hat),
                           phase(c.params.alpha_hat), std::abs(c.params.alpha_hat), i);
  };
  std::size_t best = result.table.size();
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    if (!result.table[i].converged) continue;
    if (best == result.table.size() || key(i) < key(best)) best = i;
  }
  if (best == result.table.size()) {
    std::ostringstream msg;
    msg << "optimize_params: no candidate converged\n";
    write_tuning_csv(result, msg);
    throw std::runtime_error(msg.str());
  }
  result.best = result.table[best].params;
  result.best_iterations = result.table[best].iterations;
  return result;
}

CalibrationCurve calibrate_criterion(const Problem& problem, Method method, const TransmissionParams& params,
                                     double tol_floor, const MultiVector& source, const MultiVector& reference,
                                     int restart, int max_iters) {
  if (source.cols() != 1 || reference.cols() != 1) throw std::invalid_argument("calibrate_criterion: one column expected");
  CalibrationCurve curve;
  curve.label = std::string(to_string(method)) + "_order" + std::to_string(params.order);
  KrylovConfig cfg;
  cfg.tol = tol_floor;
  cfg.restart = restart;
  cfg.max_iters = max_iters;
  const CsrMatrix& mass = problem.mass();
  const auto error_of = [&](const MultiVector& u) { return relative_errors(u, reference, &mass)[0]; };

  if (method == Method::oras) {
    const OrasContext ctx = build_oras(problem.mesh(), problem.dofs(), problem.overlap(), problem.k(), params, problem.a());
    curve.points.push_back({0, 1.0, error_of(MultiVector::Zero(source.rows(), 1))});
    solve_oras(ctx, source, cfg, [&](Index, int it, double r, const MultiVector& x) {
      curve.points.push_back({it, r, error_of(x)});
    });
  } else {
    const OsmContext ctx = build_osm(problem.mesh(), problem.dofs(), problem.partition(), problem.k(), params);
    curve.points.push_back({0, 1.0, error_of(reconstruct(ctx, MultiVector::Zero(ctx.layout.size(), 1), source))});
    solve_osm(ctx, source, cfg, [&](Index, int it, double r, const MultiVector& g) {
      curve.points.push_back({it, r, error_of(reconstruct(ctx, g, source))});
    });
  }
  return curve;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) r[idx[q]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double error_at_residual(const CalibrationCurve& curve, double r) {
  for (const auto& p : curve.points)
    if (p.residual <= r) return p.error;
  return std::numeric_limits<double>::quiet_NaN();
}

void write_tuning_csv(const TuningResult& result, std::ostream& out) {
  const auto old = out.precision(17);
  out << "candidate,order,alpha_re,alpha_im,beta_re,beta_im,iterations,converged,error\n";
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& c = result.table[i];
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << i << ',' << c.params.order << ',' << c.params.alpha_hat.real() << ',' << c.params.alpha_hat.imag() << ','
        << c.params.beta_hat.real() << ',' << c.params.beta_hat.imag() << ',' << c.iterations << ','
        << (c.converged ? 1 : 0) << ',' << err << '\n';
  }
  out.precision(old);
}

void write_calibration_csv(const CalibrationCurve& curve, std::ostream& out) {
  const auto old = out.precision(17);
  out << "iteration,residual,error\n";
  for (const auto& p : curve.points) out << p.iteration << ',' << p.residual << ',' << p.error << '\n';
  out.precision(old);
}

}  // namespace ddlab
