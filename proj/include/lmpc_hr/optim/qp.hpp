#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "lmpc_hr/condense.hpp"
#include "lmpc_hr/optim/oracle.hpp"

namespace lmpc_hr {

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
  QpStatus status = QpStatus::Infeasible;
  Vector u_sequence;
  double value = 0.0;
  double kkt_residual = 0.0;
  Vector multipliers;  // one per condensed row, zero off the final working set
  std::size_t iterations = 0;

  /// pi_MPC(x): the first n_u entries of the optimal sequence.
  Vector first_input(Index nu) const { return u_sequence.head(nu); }
};

struct QpOptions {
  Tolerances tol;
  // 0 selects 10 * (rows + cols) + 100.
  std::size_t max_iterations = 0;
};

/// Condensed MPC cost 1/2 z'Hz + (Fx x)'z + x'Cx x.
struct CondensedCost {
  Matrix H;
  Matrix Fx;  // nz x nx, linear term is Fx * x
  Matrix Cx;  // nx x nx
};

inline CondensedCost condensed_cost(const MpcProblem& p, const CondensedProblem& cp) {
  const Index nx = p.nx();
  const Index nu = p.nu();
  const int N = p.horizon();
  // Stage weights on x_1..x_{N-1}, terminal weight on x_N.
  Matrix Qbar = Matrix::Zero(N * nx, N * nx);
  for (int i = 0; i < N - 1; ++i) Qbar.block(i * nx, i * nx, nx, nx) = p.Q();
  Qbar.block((N - 1) * nx, (N - 1) * nx, nx, nx) = p.P();
  Matrix Rbar = Matrix::Zero(N * nu, N * nu);
  for (int i = 0; i < N; ++i) Rbar.block(i * nu, i * nu, nu, nu) = p.R();

  const Matrix& Gamma = cp.prediction.Gamma;
  const Matrix& Omega = cp.prediction.Omega;
  CondensedCost cost;
  cost.H = 2.0 * (Gamma.transpose() * Qbar * Gamma + Rbar);
  cost.H = 0.5 * (cost.H + cost.H.transpose());
  cost.Fx = 2.0 * Gamma.transpose() * Qbar * Omega;
  cost.Cx = p.Q() + Omega.transpose() * Qbar * Omega;
  return cost;
}

/// Sum of stage costs plus terminal cost along the simulated trajectory.
inline double trajectory_cost(const MpcProblem& p, const Vector& x0, const Vector& z_u) {
  const Index nu = p.nu();
  Vector x = x0;
  double v = 0.0;
  for (int i = 0; i < p.horizon(); ++i) {
    const Vector u = z_u.segment(i * nu, nu);
    v += x.dot(p.Q() * x) + u.dot(p.R() * u);
    x = p.system().step(x, u);
  }
  v += x.dot(p.P() * x);
  return v;
}

namespace detail {

// Primal active-set method for min 1/2 z'Hz + f'z s.t. G z <= b from a
// feasible start. Returns the final working set through `working`.
inline void active_set_solve(const Matrix& H, const Vector& f, const Matrix& G, const Vector& b, Vector& z,
                             std::vector<Index>& working, Vector& mu_w, std::size_t max_iter,
                             std::size_t& iterations) {
  const Index nz = H.rows();
  const Index nc = G.rows();
  const double step_tol = 1e-11;
  const double mult_tol = 1e-10;
  std::vector<char> in_working(nc, 0);
  for (Index i : working) in_working[i] = 1;

  for (iterations = 0;; ++iterations) {
    if (iterations >= max_iter) {
      throw Error(ErrorCode::MaxIterations, "active-set QP exceeded " + std::to_string(max_iter) + " iterations");
    }
    const Index k = static_cast<Index>(working.size());
    Matrix K = Matrix::Zero(nz + k, nz + k);
    K.topLeftCorner(nz, nz) = H;
    for (Index j = 0; j < k; ++j) {
      K.block(0, nz + j, nz, 1) = G.row(working[j]).transpose();
      K.block(nz + j, 0, 1, nz) = G.row(working[j]);
    }
    Vector rhs = Vector::Zero(nz + k);
    rhs.head(nz) = -(H * z + f);
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) throw Error(ErrorCode::MaxIterations, "active-set QP: singular KKT system");
    const Vector sol = lu.solve(rhs);
    const Vector p = sol.head(nz);
    mu_w = sol.tail(k);

    if (p.cwiseAbs().maxCoeff() <= step_tol * std::max(1.0, z.cwiseAbs().maxCoeff())) {
      if (k == 0) return;
      Index drop = 0;
      for (Index j = 1; j < k; ++j) {
        if (mu_w(j) < mu_w(drop)) drop = j;
      }
      if (mu_w(drop) >= -mult_tol) return;
      in_working[working[drop]] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    Index blocking = -1;
    const double pnorm = p.norm();
    for (Index i = 0; i < nc; ++i) {
      if (in_working[i]) continue;
      const double ap = G.row(i).dot(p);
      // Rows parallel to the working set see only rounding noise in a'p.
      if (ap <= G.row(i).norm() * (1e-12 * pnorm + 1e-14)) continue;
      const double ratio = std::max(0.0, (b(i) - G.row(i).dot(z)) / ap);
      if (ratio < alpha) {
        alpha = ratio;
        blocking = i;
      }
    }
    z += alpha * p;
    if (blocking >= 0) {
      working.push_back(blocking);
      in_working[blocking] = 1;
    }
  }
}

}  // namespace detail

/// Solves the condensed MPC QP at state x. Falls back to a phase-one LP start
/// when the warm start is absent or infeasible. Counts one labeling query.
///
/// Throws MaxIterations if the active-set loop hits its cap.
inline QpSolution solve_mpc(const MpcProblem& p, const CondensedProblem& cp, const CondensedCost& cost,
                            const Vector& x, const std::optional<Vector>& warm_start = std::nullopt,
                            QueryCounter* counter = nullptr, const QpOptions& opt = {}) {
  if (counter) ++counter->labeling;
  const Index nz = cp.n_z();
  const Index nc = cp.n_c();
  const Vector b = cp.rhs(x);

  QpSolution out;
  Vector z;
  if (warm_start && warm_start->size() == nz && cp.max_violation(x, *warm_start) <= 0.0) {
    z = *warm_start;
  } else {
    const LpSolution start = detail::phase_one(cp, x, opt.tol);
    if (start.status != LpStatus::Optimal || start.primal(nz) > opt.tol.feas) return out;
    z = start.primal.head(nz);
  }

  const Vector f = cost.Fx * x;
  std::vector<Index> working;
  Vector mu_w;
  const std::size_t max_iter = opt.max_iterations ? opt.max_iterations : 10 * static_cast<std::size_t>(nc + nz) + 100;
  detail::active_set_solve(cost.H, f, cp.G, b, z, working, mu_w, max_iter, out.iterations);

  out.status = QpStatus::Optimal;
  out.u_sequence = z;
  out.multipliers = Vector::Zero(nc);
  for (std::size_t j = 0; j < working.size(); ++j) out.multipliers(working[j]) = mu_w(static_cast<Index>(j));

  const Vector slack = b - cp.G * z;
  const double stationarity = (cost.H * z + f + cp.G.transpose() * out.multipliers).cwiseAbs().maxCoeff();
  const double primal = std::max(0.0, -slack.minCoeff());
  const double dual = std::max(0.0, -out.multipliers.minCoeff());
  const double complementarity = out.multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff();
  out.kkt_residual = std::max({stationarity, primal, dual, complementarity});
  out.value = std::max(0.0, trajectory_cost(p, x, z));
  return out;
}

inline QpSolution solve_mpc(const MpcProblem& p, const CondensedProblem& cp, const Vector& x,
                            const std::optional<Vector>& warm_start = std::nullopt, QueryCounter* counter = nullptr,
                            const QpOptions& opt = {}) {
  return solve_mpc(p, cp, condensed_cost(p, cp), x, warm_start, counter, opt);
}

}  // namespace lmpc_hr
