#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "lmpc_hr/condense.hpp"
#include "lmpc_hr/optim/lp.hpp"

namespace lmpc_hr {

struct Tolerances {
  double feas = 1e-8;
  double kkt = 1e-7;
};

/// Per-run solver bookkeeping. Each run owns its own counter.
struct QueryCounter {
  std::size_t boundary = 0;     // boundary LPs
  std::size_t feasibility = 0;  // phase-one feasibility LPs
  std::size_t labeling = 0;     // MPC labeling QPs

  std::size_t sampling() const noexcept { return boundary + feasibility; }
};

enum class Feasibility { Feasible, Infeasible };

struct BoundaryResult {
  double alpha_star = 0.0;
  Vector z_u_witness;
  Index limiting_row = -1;  // -1 only when no row is active
};

namespace detail {

inline LpOptions lp_options(const Tolerances& tol) {
  LpOptions o;
  o.tol_feas = tol.feas;
  return o;
}

// max -s  s.t.  G z - s 1 <= w + F x,  s >= 0.
inline LpSolution phase_one(const CondensedProblem& cp, const Vector& x, const Tolerances& tol) {
  const Index nz = cp.n_z();
  Matrix A(cp.n_c(), nz + 1);
  A.leftCols(nz) = cp.G;
  A.col(nz).setConstant(-1.0);
  Vector c = Vector::Zero(nz + 1);
  c(nz) = -1.0;
  std::vector<bool> nonneg(nz + 1, false);
  nonneg[nz] = true;
  return lp_solve(c, A, cp.rhs(x), nonneg, lp_options(tol));
}

// Boundary LP on an explicit row set, without normalizing the direction:
//   max alpha  s.t.  G z - alpha F d <= w + F x,  alpha >= 0.
inline BoundaryResult boundary_step(const Matrix& G, const Matrix& F, const Vector& w, const Vector& x,
                                    const Vector& direction, const Tolerances& tol = {}) {
  const Index nz = G.cols();
  Matrix A(G.rows(), nz + 1);
  A.leftCols(nz) = G;
  A.col(nz) = -(F * direction);
  Vector c = Vector::Zero(nz + 1);
  c(nz) = 1.0;
  std::vector<bool> nonneg(nz + 1, false);
  nonneg[nz] = true;

  const LpSolution sol = lp_solve(c, A, w + F * x, nonneg, lp_options(tol));
  if (sol.status == LpStatus::Infeasible) {
    throw Error(ErrorCode::InfeasibleAnchor, "boundary LP infeasible at alpha = 0");
  }
  if (sol.status == LpStatus::Unbounded) {
    throw Error(ErrorCode::UnboundedSet, "boundary LP unbounded: feasible set is not bounded along the direction");
  }

  BoundaryResult res;
  res.alpha_star = std::max(0.0, sol.primal(nz));
  res.z_u_witness = sol.primal.head(nz);
  double best_dual = -1.0;
  for (Index r : sol.active_rows) {
    if (sol.dual(r) > best_dual) {
      best_dual = sol.dual(r);
      res.limiting_row = r;
    }
  }
  return res;
}

}  // namespace detail

/// True iff some input sequence satisfies G z <= w + F x, decided by a
/// single-slack phase-one LP. Counts one feasibility query.
inline Feasibility feasibility_check(const CondensedProblem& cp, const Vector& x, QueryCounter* counter = nullptr,
                                     const Tolerances& tol = {}) {
  if (x.size() != cp.nx) throw Error(ErrorCode::InvalidProblem, "feasibility_check: state dimension mismatch");
  if (counter) ++counter->feasibility;
  const LpSolution sol = detail::phase_one(cp, x, tol);
  if (sol.status != LpStatus::Optimal) return Feasibility::Infeasible;
  return sol.primal(cp.n_z()) <= tol.feas ? Feasibility::Feasible : Feasibility::Infeasible;
}

inline bool is_feasible(const CondensedProblem& cp, const Vector& x, QueryCounter* counter = nullptr,
                        const Tolerances& tol = {}) {
  return feasibility_check(cp, x, counter, tol) == Feasibility::Feasible;
}

/// Largest alpha >= 0 such that x + alpha d stays in the feasible set, from
/// one LP with N n_u + 1 variables. d is normalized before solving.
///
/// Throws UnboundedSet if the set is unbounded along d, InfeasibleAnchor if
/// x itself is infeasible. Counts one boundary query.
inline BoundaryResult boundary_oracle(const CondensedProblem& cp, const Vector& x, const Vector& d,
                                      QueryCounter* counter = nullptr, const Tolerances& tol = {}) {
  if (x.size() != cp.nx || d.size() != cp.nx) {
    throw Error(ErrorCode::InvalidProblem, "boundary_oracle: dimension mismatch");
  }
  const double norm = d.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::InvalidProblem, "boundary_oracle: zero direction");
  if (counter) ++counter->boundary;
  return detail::boundary_step(cp.G, cp.F, cp.w, x, d / norm, tol);
}

}  // namespace lmpc_hr
