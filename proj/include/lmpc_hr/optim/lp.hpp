#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lmpc_hr/error.hpp"
#include "lmpc_hr/model.hpp"

namespace lmpc_hr {

enum class LpStatus { Optimal, Infeasible, Unbounded };

constexpr std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "OPTIMAL";
    case LpStatus::Infeasible: return "INFEASIBLE";
    case LpStatus::Unbounded: return "UNBOUNDED";
  }
  return "?";
}

struct LpOptions {
  double pivot_tol = 1e-9;
  double tol_feas = 1e-8;
  // Dantzig pricing for bland_after_factor * (rows + cols) pivots, then Bland.
  double bland_after_factor = 5.0;
  // Hard cap on total pivots; 0 selects 50 * (rows + cols) + 1000.
  std::size_t max_iterations = 0;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Vector primal;
  Vector dual;  // one nonnegative multiplier per inequality row
  std::vector<Index> active_rows;
  std::size_t iterations = 0;
};

namespace detail {

// Dense tableau simplex for  max c'y  s.t.  A y <= b, y >= 0.
//
// Layout: rows 0..m-1 constraints, row m objective, row m+1 phase-one
// objective; column n is the single artificial variable, column n+1 the rhs.
// Variable ids: 0..n-1 structural, n..n+m-1 slacks, -1 artificial.
// mirror[j] names the structural column equal to -A.col(j) (the other half of
// a split free variable), or -1.
class DenseSimplex {
 public:
  DenseSimplex(const Matrix& A, const Vector& b, const Vector& c, std::vector<Index> mirror, const LpOptions& opt)
      : m_(A.rows()), n_(A.cols()), opt_(opt), A_(A), b_(b), c_(c), mirror_(std::move(mirror)),
        basic_(static_cast<std::size_t>(n_), 0), basis_(m_), nonbasis_(n_ + 1), D_(m_ + 2, n_ + 2) {
    D_.setZero();
    for (Index i = 0; i < m_; ++i) {
      for (Index j = 0; j < n_; ++j) D_(i, j) = A(i, j);
      basis_[i] = n_ + i;
      D_(i, n_) = -1.0;
      D_(i, n_ + 1) = b(i);
    }
    for (Index j = 0; j < n_; ++j) {
      nonbasis_[j] = j;
      D_(m_, j) = -c(j);
    }
    nonbasis_[n_] = -1;
    D_(m_ + 1, n_) = 1.0;
    bland_after_ = static_cast<std::size_t>(opt_.bland_after_factor * static_cast<double>(m_ + n_));
    max_iter_ = opt_.max_iterations ? opt_.max_iterations : 50 * static_cast<std::size_t>(m_ + n_) + 1000;
  }

  LpStatus solve() {
    if (m_ > 0) {
      Index r = 0;
      for (Index i = 1; i < m_; ++i) {
        if (D_(i, n_ + 1) < D_(r, n_ + 1)) r = i;
      }
      if (D_(r, n_ + 1) < -opt_.pivot_tol) {
        pivot(r, n_);
        run(2);
        if (D_(m_ + 1, n_ + 1) < -opt_.tol_feas) return LpStatus::Infeasible;
        // Drive a zero-level artificial out of the basis.
        for (Index i = 0; i < m_; ++i) {
          if (basis_[i] != -1) continue;
          Index s = -1;
          double best = opt_.pivot_tol;
          for (Index j = 0; j < n_; ++j) {
            if (std::abs(D_(i, j)) > best) {
              best = std::abs(D_(i, j));
              s = j;
            }
          }
          if (s >= 0) pivot(i, s);
        }
      }
    }
    return run(1) ? LpStatus::Optimal : LpStatus::Unbounded;
  }

  Vector primal() const {
    Vector y = Vector::Zero(n_);
    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] >= 0 && basis_[i] < n_) y(basis_[i]) = D_(i, n_ + 1);
    }
    return y;
  }

  Vector dual() const {
    Vector y = Vector::Zero(m_);
    for (Index j = 0; j <= n_; ++j) {
      if (nonbasis_[j] >= n_) y(nonbasis_[j] - n_) = D_(m_, j);
    }
    return y;
  }

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void pivot(Index r, Index s) {
    const double inv = 1.0 / D_(r, s);
    const double prs = D_(r, s);
    for (Index i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      const double f = D_(i, s) * inv;
      if (f == 0.0) continue;
      D_.row(i) -= f * D_.row(r);
      D_(i, s) = prs * f;
    }
    D_.row(r) *= inv;
    D_.col(s) *= -inv;
    D_(r, s) = inv;
    std::swap(basis_[r], nonbasis_[s]);
    if (basis_[r] >= 0 && basis_[r] < n_) basic_[static_cast<std::size_t>(basis_[r])] = 1;
    if (nonbasis_[s] >= 0 && nonbasis_[s] < n_) basic_[static_cast<std::size_t>(nonbasis_[s])] = 0;
    ++iterations_;
    ++since_refactor_;
  }

  // Entry (r, v) of [A | -1 | I] for a variable id v.
  double entry(Index r, Index v) const {
    if (v == -1) return -1.0;
    if (v < n_) return A_(r, v);
    return v - n_ == r ? 1.0 : 0.0;
  }

  // Cost of variable v in the objective row used by run(phase).
  double cost(Index v, int phase) const {
    if (phase == 2) return v == -1 ? -1.0 : 0.0;
    return v >= 0 && v < n_ ? c_(v) : 0.0;
  }

  // Basic slacks are identity columns, so the basis matrix reduces to the
  // k x k block of basic structural columns (S, as tableau rows) on the rows
  // whose slacks are nonbasic (R, as constraint indices).
  struct Split {
    std::vector<Index> S;
    std::vector<Index> R;
    Matrix M;
  };

  bool split(Split& sp) const {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) sp.S.push_back(i);
    }
    for (Index j = 0; j <= n_; ++j) {
      if (nonbasis_[j] >= n_) sp.R.push_back(nonbasis_[j] - n_);
    }
    const Index k = static_cast<Index>(sp.S.size());
    if (static_cast<Index>(sp.R.size()) != k) return false;
    sp.M.resize(k, k);
    for (Index p = 0; p < k; ++p) {
      for (Index q = 0; q < k; ++q) sp.M(p, q) = entry(sp.R[p], basis_[sp.S[q]]);
    }
    return true;
  }

  // Recomputes the basic solution and the duals of the current basis from the
  // original data. If the basis is primal and dual feasible there, writes the
  // fresh values into the tableau and returns true.
  bool verify(int phase) {
    Split sp;
    if (!split(sp)) return false;
    const Index k = static_cast<Index>(sp.S.size());
    Vector yS(k), pi(k), cS(k);
    Eigen::FullPivLU<Matrix> lu;
    if (k > 0) {
      lu.compute(sp.M);
      if (!lu.isInvertible()) return false;
      Vector bR(k);
      for (Index p = 0; p < k; ++p) {
        bR(p) = b_(sp.R[p]);
        cS(p) = cost(basis_[sp.S[p]], phase);
      }
      yS = lu.solve(bR);
      pi = lu.transpose().solve(cS);
    }
    Vector slack = b_;
    for (Index q = 0; q < k; ++q) {
      const Index v = basis_[sp.S[q]];
      for (Index r = 0; r < m_; ++r) slack(r) -= entry(r, v) * yS(q);
    }
    const double ptol = opt_.pivot_tol * std::max(1.0, b_.cwiseAbs().maxCoeff());
    if (!yS.allFinite() || !pi.allFinite()) return false;
    if (k > 0 && yS.minCoeff() < -ptol) return false;
    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] >= n_ && slack(basis_[i] - n_) < -ptol) return false;
    }
    const Index x = m_ + phase - 1;
    Vector rc(n_ + 1);
    for (Index j = 0; j <= n_; ++j) {
      const Index v = nonbasis_[j];
      double t = -cost(v, phase);
      for (Index p = 0; p < k; ++p) t += pi(p) * entry(sp.R[p], v);
      rc(j) = t;
      if (eligible(j, phase) && t < -opt_.pivot_tol) return false;
    }
    for (Index i = 0; i < m_; ++i) {
      const Index v = basis_[i];
      if (v >= n_) D_(i, n_ + 1) = slack(v - n_);
    }
    for (Index p = 0; p < k; ++p) D_(sp.S[p], n_ + 1) = yS(p);
    D_(x, n_ + 1) = k > 0 ? cS.dot(yS) : 0.0;
    D_.row(x).head(n_ + 1) = rc.transpose();
    return true;
  }

  // Rebuilds the whole tableau from the original data for the current basis,
  // discarding the round-off accumulated by the pivots. Returns false and
  // leaves the tableau untouched if the basis is numerically singular.
  bool refactor() {
    Split sp;
    if (!split(sp)) return false;
    const Index k = static_cast<Index>(sp.S.size());
    Matrix NB(m_, n_ + 2);
    for (Index j = 0; j <= n_; ++j) {
      for (Index r = 0; r < m_; ++r) NB(r, j) = entry(r, nonbasis_[j]);
    }
    NB.col(n_ + 1) = b_;
    Matrix AS(m_, k);
    for (Index q = 0; q < k; ++q) {
      for (Index r = 0; r < m_; ++r) AS(r, q) = entry(r, basis_[sp.S[q]]);
    }
    Matrix WS(k, n_ + 2);
    if (k > 0) {
      Eigen::FullPivLU<Matrix> lu(sp.M);
      if (!lu.isInvertible()) return false;
      Matrix NR(k, n_ + 2);
      for (Index p = 0; p < k; ++p) NR.row(p) = NB.row(sp.R[p]);
      WS = lu.solve(NR);
      if (!WS.allFinite()) return false;
    }
    const Matrix WT = NB - AS * WS;

    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] >= n_) D_.row(i) = WT.row(basis_[i] - n_);
    }
    for (Index p = 0; p < k; ++p) D_.row(sp.S[p]) = WS.row(p);
    for (int phase : {1, 2}) {
      const Index x = m_ + phase - 1;
      D_.row(x).setZero();
      for (Index p = 0; p < k; ++p) D_.row(x) += cost(basis_[sp.S[p]], phase) * WS.row(p);
      for (Index j = 0; j <= n_; ++j) D_(x, j) -= cost(nonbasis_[j], phase);
    }
    since_refactor_ = 0;
    return true;
  }

  // Excludes the artificial outside phase one and the mirror of a basic
  // column. In exact arithmetic that mirror has zero reduced cost and the
  // tableau column -e_i; pivoting on its round-off makes the basis singular.
  bool eligible(Index j, int phase) const {
    const Index v = nonbasis_[j];
    if (v == -phase) return false;
    if (v < 0 || v >= n_) return true;
    const Index w = mirror_[static_cast<std::size_t>(v)];
    return w < 0 || !basic_[static_cast<std::size_t>(w)];
  }

  Index most_infeasible_row() const {
    const double ptol = opt_.pivot_tol * std::max(1.0, b_.cwiseAbs().maxCoeff());
    Index r = -1;
    for (Index i = 0; i < m_; ++i) {
      if (D_(i, n_ + 1) < -ptol && (r == -1 || D_(i, n_ + 1) < D_(r, n_ + 1))) r = i;
    }
    return r;
  }

  // Dual ratio test for leaving row r: keeps every reduced cost nonnegative.
  Index dual_entering(Index r, int phase) const {
    const Index x = m_ + phase - 1;
    Index e = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j <= n_; ++j) {
      if (!eligible(j, phase)) continue;
      const double a = D_(r, j);
      if (a >= -opt_.pivot_tol) continue;
      const double ratio = std::max(D_(x, j), 0.0) / -a;
      if (ratio < best || (ratio == best && a < D_(r, e))) {
        best = ratio;
        e = j;
      }
    }
    return e;
  }

  // Returns false on unboundedness.
  bool run(int phase) {
    const Index x = m_ + phase - 1;
    // Columns priced out because their ray is round-off, not a real ray.
    std::vector<char> excluded(static_cast<std::size_t>(n_ + 1), 0);
    for (;;) {
      if (iterations_ >= max_iter_) {
        throw Error(ErrorCode::CyclingGuardExceeded,
                    "simplex exceeded " + std::to_string(max_iter_) + " pivots");
      }
      const bool bland = iterations_ >= bland_after_;
      Index s = -1;
      for (Index j = 0; j <= n_; ++j) {
        if (!eligible(j, phase) || excluded[static_cast<std::size_t>(j)]) continue;
        const double rc = D_(x, j);
        if (rc >= -opt_.pivot_tol) continue;
        if (s == -1) {
          s = j;
        } else if (bland) {
          if (nonbasis_[j] < nonbasis_[s]) s = j;
        } else if (rc < D_(x, s) || (rc == D_(x, s) && nonbasis_[j] < nonbasis_[s])) {
          s = j;
        }
      }
      if (s == -1) {
        if (since_refactor_ > 0 && !verify(phase)) {
          if (!refactor()) return true;
          continue;
        }
        // A fresh tableau can expose a basis that drifted out of primal
        // feasibility; it is still dual feasible, so dual simplex pivots
        // restore it.
        const Index r = most_infeasible_row();
        if (r < 0) return true;
        const Index e = dual_entering(r, phase);
        if (e < 0) return true;
        pivot(r, e);
        continue;
      }

      // Two-pass ratio test: find the minimum ratio with slightly relaxed
      // right-hand sides, then take the largest pivot element among rows
      // within that bound. Small pivots are what destroy tableau accuracy.
      double bound = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        const double a = D_(i, s);
        if (a <= opt_.pivot_tol) continue;
        bound = std::min(bound, (std::max(D_(i, n_ + 1), 0.0) + opt_.pivot_tol) / a);
      }
      if (!std::isfinite(bound)) {
        // A genuine ray has a clearly negative reduced cost and no positive
        // entries at all; anything else is noise from earlier pivots.
        const bool noisy = D_.col(s).head(m_).maxCoeff() > 0.0 || D_(x, s) > -kRayTol;
        if (!noisy) {
          if (since_refactor_ > 0 && refactor()) continue;
          return false;
        }
        excluded[static_cast<std::size_t>(s)] = 1;
        continue;
      }
      Index r = -1;
      for (Index i = 0; i < m_; ++i) {
        const double a = D_(i, s);
        if (a <= opt_.pivot_tol) continue;
        if (std::max(D_(i, n_ + 1), 0.0) / a > bound) continue;
        if (r == -1 || a > D_(r, s) || (a == D_(r, s) && basis_[i] < basis_[r])) r = i;
      }
      pivot(r, s);
      std::fill(excluded.begin(), excluded.end(), 0);
      if (since_refactor_ >= kRefactorEvery) refactor();
    }
  }

  static constexpr double kRayTol = 1e-7;
  static constexpr std::size_t kRefactorEvery = 32;

  Index m_;
  Index n_;
  LpOptions opt_;
  Matrix A_;
  Vector b_;
  Vector c_;
  std::vector<Index> mirror_;
  std::vector<char> basic_;
  std::vector<Index> basis_;
  std::vector<Index> nonbasis_;
  Tableau D_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
  std::size_t bland_after_ = 0;
  std::size_t max_iter_ = 0;
};

}  // namespace detail

/// Maximizes c'z subject to A z <= b and z_i >= 0 for every i with
/// nonneg[i] set; unmasked variables are free. Deterministic for fixed input.
///
/// Throws Error(CyclingGuardExceeded) if the pivot cap is hit.
inline LpSolution lp_solve(const Vector& c, const Matrix& A, const Vector& b, const std::vector<bool>& nonneg,
                           const LpOptions& opt = {}) {
  const Index n = c.size();
  const Index m = b.size();
  if (A.rows() != m || A.cols() != n || static_cast<Index>(nonneg.size()) != n) {
    throw Error(ErrorCode::InvalidProblem, "lp_solve: inconsistent dimensions");
  }

  // Free variables split as z = z+ - z-.
  std::vector<Index> pos(n), neg(n, -1);
  Index cols = 0;
  for (Index j = 0; j < n; ++j) {
    pos[j] = cols++;
    if (!nonneg[j]) neg[j] = cols++;
  }
  Matrix As(m, cols);
  Vector cs(cols);
  std::vector<Index> mirror(static_cast<std::size_t>(cols), -1);
  for (Index j = 0; j < n; ++j) {
    As.col(pos[j]) = A.col(j);
    cs(pos[j]) = c(j);
    if (neg[j] >= 0) {
      As.col(neg[j]) = -A.col(j);
      cs(neg[j]) = -c(j);
      mirror[static_cast<std::size_t>(pos[j])] = neg[j];
      mirror[static_cast<std::size_t>(neg[j])] = pos[j];
    }
  }

  // An optimum whose primal residual exceeds this bound came from a
  // numerically damaged tableau; retry once with Bland pricing throughout.
  const double residual_bound = 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff());
  LpOptions retry = opt;
  retry.bland_after_factor = 0.0;
  LpSolution sol;
  Vector y;
  Vector dual;
  for (const LpOptions* o : {&opt, static_cast<const LpOptions*>(&retry)}) {
    detail::DenseSimplex simplex(As, b, cs, mirror, *o);
    sol.status = simplex.solve();
    sol.iterations += simplex.iterations();
    if (sol.status == LpStatus::Infeasible) return sol;
    y = simplex.primal();
    dual = simplex.dual();
    if (sol.status == LpStatus::Unbounded || m == 0 || (As * y - b).maxCoeff() <= residual_bound) break;
    if (o == &retry) {
      throw Error(ErrorCode::CyclingGuardExceeded, "simplex lost primal feasibility (residual " +
                                                       std::to_string((As * y - b).maxCoeff()) + ")");
    }
  }

  sol.primal.resize(n);
  for (Index j = 0; j < n; ++j) sol.primal(j) = y(pos[j]) - (neg[j] >= 0 ? y(neg[j]) : 0.0);
  if (sol.status == LpStatus::Unbounded) {
    sol.objective = std::numeric_limits<double>::infinity();
    return sol;
  }
  sol.objective = c.dot(sol.primal);
  sol.dual = std::move(dual);
  const Vector slack = b - A * sol.primal;
  for (Index i = 0; i < m; ++i) {
    if (std::abs(slack(i)) <= opt.tol_feas * std::max(1.0, std::abs(b(i)))) sol.active_rows.push_back(i);
  }
  return sol;
}

}  // namespace lmpc_hr
