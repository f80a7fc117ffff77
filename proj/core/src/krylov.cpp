// SPDX-License-Identifier: Apache-2.0

#include "ddlab/krylov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ddlab {

LinearOperator matrix_operator(const CsrMatrix& a) {
  LinearOperator op;
  op.size = a.rows();
  op.category = CostCategory::spmm;
  op.apply = [&a](const MultiVector& x, CostCounters* c) { return spmm(a, x, c); };
  return op;
}

void KrylovConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("KrylovConfig: tol must be positive");
  if (restart < 1) throw std::invalid_argument("KrylovConfig: restart must be >= 1");
  if (max_iters < 0) throw std::invalid_argument("KrylovConfig: max_iters must be >= 0");
  if (batch < 0) throw std::invalid_argument("KrylovConfig: batch must be >= 0");
}

const char* to_string(ColumnStatus s) {
  switch (s) {
    case ColumnStatus::converged: return "converged";
    case ColumnStatus::max_iters: return "max_iters";
    case ColumnStatus::stagnated: return "stagnated";
  }
  return "?";
}

bool RunStats::all_converged() const {
  return std::all_of(status.begin(), status.end(), [](ColumnStatus s) { return s == ColumnStatus::converged; });
}

int RunStats::max_iterations() const {
  return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
}

namespace {

struct ColumnState {
  Index column;  // index into b
  double bnorm;
  Eigen::MatrixXcd v;  // n x (m+1)
  Eigen::MatrixXcd h;  // (m+1) x m, rotated in place to upper triangular
  std::vector<double> cs;
  std::vector<Complex> sn;
  Eigen::VectorXcd g;
  int k = 0;
  double cycle_start = 0.0;
};

// Rotation zeroing b in (a, b): [c s; -conj(s) c], c real.
void givens(Complex a, Complex b, double& c, Complex& s) {
  const double abs_a = std::abs(a);
  const double abs_b = std::abs(b);
  if (abs_b == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (abs_a == 0.0) {
    c = 0.0;
    s = std::conj(b) / abs_b;
    return;
  }
  const double rho = std::hypot(abs_a, abs_b);
  c = abs_a / rho;
  s = (a / abs_a) * std::conj(b) / rho;
}

Eigen::VectorXcd least_squares(const ColumnState& s, int k) {
  Eigen::VectorXcd y = s.g.head(k);
  s.h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solveInPlace(y);
  return y;
}

// One Arnoldi step for column state s at position j with candidate w.
// Returns the new residual estimate |g(j+1)|.
double arnoldi_step(ColumnState& s, int j, Eigen::VectorXcd w) {
  const double before = w.norm();
  for (int i = 0; i <= j; ++i) {
    const Complex hij = s.v.col(i).dot(w);
    s.h(i, j) = hij;
    w -= hij * s.v.col(i);
  }
  double after = w.norm();
  if (after < before / std::sqrt(2.0)) {
    for (int i = 0; i <= j; ++i) {
      const Complex corr = s.v.col(i).dot(w);
      s.h(i, j) += corr;
      w -= corr * s.v.col(i);
    }
    after = w.norm();
  }
  s.h(j + 1, j) = after;
  if (after > 0.0) s.v.col(j + 1) = w / after;

  for (int i = 0; i < j; ++i) {
    const Complex t = s.cs[i] * s.h(i, j) + s.sn[i] * s.h(i + 1, j);
    s.h(i + 1, j) = -std::conj(s.sn[i]) * s.h(i, j) + s.cs[i] * s.h(i + 1, j);
    s.h(i, j) = t;
  }
  double c;
  Complex sn;
  givens(s.h(j, j), s.h(j + 1, j), c, sn);
  s.cs[j] = c;
  s.sn[j] = sn;
  s.h(j, j) = c * s.h(j, j) + sn * s.h(j + 1, j);
  s.h(j + 1, j) = 0.0;
  s.g(j + 1) = -std::conj(sn) * s.g(j);
  s.g(j) = c * s.g(j);
  s.k = j + 1;
  return std::abs(s.g(j + 1));
}

}  // namespace

GmresResult pblock_gmres(const LinearOperator& op, const LinearOperator* precond, const MultiVector& b,
                         const KrylovConfig& cfg, const IterateObserver& observer) {
  cfg.validate();
  if (b.rows() != op.size) {
    std::ostringstream msg;
    msg << "pblock_gmres: operator of size " << op.size << ", right-hand side has " << b.rows() << " rows";
    throw LinalgError(msg.str());
  }
  if (precond != nullptr && precond->size != op.size) throw LinalgError("pblock_gmres: preconditioner size mismatch");
  const auto wall_start = std::chrono::steady_clock::now();
  const Index n = b.rows();
  const Index nrhs = b.cols();
  const int m = cfg.restart;
  GmresResult res;
  res.x = MultiVector::Zero(n, nrhs);
  RunStats& st = res.stats;
  st.histories.assign(static_cast<std::size_t>(nrhs), {});
  st.iterations.assign(static_cast<std::size_t>(nrhs), 0);
  st.status.assign(static_cast<std::size_t>(nrhs), ColumnStatus::converged);
  st.final_residuals.assign(static_cast<std::size_t>(nrhs), 0.0);
  const Index width = cfg.batch > 0 ? std::min<Index>(cfg.batch, nrhs) : nrhs;
  st.width = static_cast<int>(width);
  st.vector_length = n;
  st.krylov_bytes = static_cast<std::size_t>(n) * static_cast<std::size_t>(width) * static_cast<std::size_t>(m + 1) * 16;
  CostCounters* counters = &st.counters;

  const auto apply_precond = [&](const MultiVector& v) { return precond ? precond->apply(v, counters) : v; };

  for (Index first = 0; first < nrhs; first += std::max<Index>(width, 1)) {
    const Index last = std::min(nrhs, first + width);
    std::vector<ColumnState> states;
    for (Index c = first; c < last; ++c) {
      const double bnorm = b.col(c).norm();
      if (!std::isfinite(bnorm)) throw LinalgError("pblock_gmres: non-finite right-hand side");
      if (bnorm == 0.0) {
        st.histories[c] = {0.0};
        continue;
      }
      ColumnState s;
      s.column = c;
      s.bnorm = bnorm;
      s.v = Eigen::MatrixXcd::Zero(n, m + 1);
      s.h = Eigen::MatrixXcd::Zero(m + 1, m);
      s.cs.assign(static_cast<std::size_t>(m), 0.0);
      s.sn.assign(static_cast<std::size_t>(m), 0.0);
      s.g = Eigen::VectorXcd::Zero(m + 1);
      st.histories[c] = {1.0};
      states.push_back(std::move(s));
    }

    // Indices into `states` still running, and their current residuals.
    std::vector<std::size_t> active(states.size());
    for (std::size_t a = 0; a < states.size(); ++a) active[a] = a;
    MultiVector r(n, static_cast<Index>(states.size()));
    for (std::size_t a = 0; a < states.size(); ++a) r.col(static_cast<Index>(a)) = b.col(states[a].column);
    std::vector<Index> r_slot(states.size());
    for (std::size_t a = 0; a < states.size(); ++a) r_slot[a] = static_cast<Index>(a);

    while (!active.empty()) {
      for (const std::size_t a : active) {
        ColumnState& s = states[a];
        const double beta = r.col(r_slot[a]).norm();
        s.v.col(0) = r.col(r_slot[a]) / beta;
        s.h.setZero();
        s.g.setZero();
        s.g(0) = beta;
        s.k = 0;
        s.cycle_start = beta / s.bnorm;
      }
      {
        std::vector<std::size_t> running;
        for (const std::size_t a : active) {
          if (states[a].cycle_start <= cfg.tol) {
            st.status[states[a].column] = ColumnStatus::converged;
            st.final_residuals[states[a].column] = states[a].cycle_start;
          } else {
            running.push_back(a);
          }
        }
        active = std::move(running);
      }
      if (active.empty()) break;
      std::vector<std::size_t> inner;
      for (const std::size_t a : active)
        if (st.iterations[states[a].column] < cfg.max_iters) inner.push_back(a);

      for (int j = 0; j < m && !inner.empty(); ++j) {
        MultiVector vj(n, static_cast<Index>(inner.size()));
        for (std::size_t q = 0; q < inner.size(); ++q) vj.col(static_cast<Index>(q)) = states[inner[q]].v.col(j);
        const MultiVector w = op.apply(apply_precond(vj), counters);
        std::vector<std::size_t> still;
        {
          ScopedTimer timer(counters, CostCategory::orthogonalization);
          for (std::size_t q = 0; q < inner.size(); ++q) {
            ColumnState& s = states[inner[q]];
            const double est = arnoldi_step(s, j, w.col(static_cast<Index>(q))) / s.bnorm;
            const Index c = s.column;
            ++st.iterations[c];
            st.histories[c].push_back(est);
            if (est > cfg.tol && st.iterations[c] < cfg.max_iters) still.push_back(inner[q]);
          }
        }
        if (observer) {
          MultiVector z(n, static_cast<Index>(inner.size()));
          for (std::size_t q = 0; q < inner.size(); ++q) {
            const ColumnState& s = states[inner[q]];
            z.col(static_cast<Index>(q)) = s.v.leftCols(s.k) * least_squares(s, s.k);
          }
          const MultiVector pz = apply_precond(z);
          for (std::size_t q = 0; q < inner.size(); ++q) {
            const ColumnState& s = states[inner[q]];
            const MultiVector xq = res.x.col(s.column) + pz.col(static_cast<Index>(q));
            observer(s.column, st.iterations[s.column], st.histories[s.column].back(), xq);
          }
        }
        inner = std::move(still);
      }

      // Cycle end: x += precond(V y), then the true residual.
      std::vector<std::size_t> updated;
      for (const std::size_t a : active)
        if (states[a].k > 0) updated.push_back(a);
      if (!updated.empty()) {
        MultiVector z(n, static_cast<Index>(updated.size()));
        for (std::size_t q = 0; q < updated.size(); ++q) {
          const ColumnState& s = states[updated[q]];
          Eigen::VectorXcd y;
          {
            ScopedTimer timer(counters, CostCategory::orthogonalization);
            y = least_squares(s, s.k);
          }
          z.col(static_cast<Index>(q)) = s.v.leftCols(s.k) * y;
        }
        const MultiVector pz = apply_precond(z);
        for (std::size_t q = 0; q < updated.size(); ++q) res.x.col(states[updated[q]].column) += pz.col(static_cast<Index>(q));
      }
      MultiVector xa(n, static_cast<Index>(active.size()));
      for (std::size_t q = 0; q < active.size(); ++q) xa.col(static_cast<Index>(q)) = res.x.col(states[active[q]].column);
      MultiVector ra = op.apply(xa, counters);
      for (std::size_t q = 0; q < active.size(); ++q)
        ra.col(static_cast<Index>(q)) = b.col(states[active[q]].column) - ra.col(static_cast<Index>(q));

      std::vector<std::size_t> next;
      for (std::size_t q = 0; q < active.size(); ++q) {
        const std::size_t a = active[q];
        const ColumnState& s = states[a];
        const Index c = s.column;
        const double true_rel = ra.col(static_cast<Index>(q)).norm() / s.bnorm;
        st.final_residuals[c] = true_rel;
        r_slot[a] = static_cast<Index>(q);
        if (true_rel <= cfg.tol) {
          st.status[c] = ColumnStatus::converged;
        } else if (st.iterations[c] >= cfg.max_iters) {
          st.status[c] = ColumnStatus::max_iters;
        } else if (true_rel >= s.cycle_start) {
          st.status[c] = ColumnStatus::stagnated;
        } else {
          next.push_back(a);
        }
      }
      r = std::move(ra);
      active = std::move(next);
    }
  }
  st.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return res;
}

RichardsonResult richardson(const LinearOperator& t, const MultiVector& b, int iters, CostCounters* counters) {
  if (iters < 0) throw std::invalid_argument("richardson: iteration count must be >= 0");
  if (b.rows() != t.size) throw LinalgError("richardson: size mismatch");
  RichardsonResult out;
  out.iterates.push_back(MultiVector::Zero(b.rows(), b.cols()));
  double bmax = 0.0;
  for (Index c = 0; c < b.cols(); ++c) bmax = std::max(bmax, b.col(c).norm());
  for (int it = 0; it < iters; ++it) {
    MultiVector g = t.apply(out.iterates.back(), counters) + b;
    bool blown = !g.allFinite();
    for (Index c = 0; c < g.cols() && !blown; ++c) blown = g.col(c).norm() > 1e6 * bmax && bmax > 0.0;
    out.iterates.push_back(std::move(g));
    if (blown) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

void write_histories(const RunStats& stats, std::ostream& out) {
  const auto old = out.precision(17);
  out << "iteration";
  for (std::size_t c = 0; c < stats.histories.size(); ++c) out << ",rhs" << c;
  out << '\n';
  std::size_t rows = 0;
  for (const auto& h : stats.histories) rows = std::max(rows, h.size());
  for (std::size_t it = 0; it < rows; ++it) {
    out << it;
    for (const auto& h : stats.histories) {
      out << ',';
      if (it < h.size()) out << h[it];
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace ddlab
