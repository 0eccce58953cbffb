#pragma once

#include <limits>
#include <string>
#include <vector>

#include "lmpc_hr/model.hpp"

namespace lmpc_hr {

/// Stacked predictions z_x = Omega x + Gamma z_u with z_x = [x_1; ...; x_N]
/// and z_u = [u_0; ...; u_{N-1}].
struct PredictionMatrices {
  Matrix Omega;  // (N nx) x nx, block i = A^{i+1}
  Matrix Gamma;  // (N nx) x (N nu), block (i, j) = A^{i-j} B for j <= i
};

inline PredictionMatrices build_prediction_matrices(const LinearSystem& sys, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidProblem, "horizon N must be >= 1");
  const Index nx = sys.nx();
  const Index nu = sys.nu();
  const Index N = horizon;

  // powers[k] = A^k, by repeated multiplication.
  std::vector<Matrix> powers;
  powers.reserve(N + 1);
  powers.push_back(Matrix::Identity(nx, nx));
  for (Index k = 1; k <= N; ++k) powers.push_back(sys.A() * powers.back());

  PredictionMatrices pm{Matrix::Zero(N * nx, nx), Matrix::Zero(N * nx, N * nu)};
  for (Index i = 0; i < N; ++i) {
    pm.Omega.block(i * nx, 0, nx, nx) = powers[i + 1];
    for (Index j = 0; j <= i; ++j) {
      pm.Gamma.block(i * nx, j * nu, nx, nu) = powers[i - j] * sys.B();
    }
  }
  return pm;
}

struct RowLabel {
  enum class Kind { Input, State, Terminal };
  Kind kind = Kind::Input;
  int step = 0;  // prediction step i; N for terminal rows

  friend bool operator==(const RowLabel&, const RowLabel&) = default;
};

inline std::string to_string(const RowLabel& label) {
  switch (label.kind) {
    case RowLabel::Kind::Input: return "INPUT(" + std::to_string(label.step) + ")";
    case RowLabel::Kind::State: return "STATE(" + std::to_string(label.step) + ")";
    case RowLabel::Kind::Terminal: return "TERMINAL";
  }
  return "?";
}

/// All MPC constraints as G z_u <= w + F x.
///
/// Row order is fixed: for i = 0..N-1 the input rows of u_i followed by the
/// state rows of x_i, then the terminal rows. STATE(0) rows have G = 0,
/// F = -H_x, w = h_x.
struct CondensedProblem {
  Matrix G;
  Matrix F;
  Vector w;
  std::vector<RowLabel> row_labels;
  PredictionMatrices prediction;
  Index nx = 0;
  Index nu = 0;
  int horizon = 0;

  Index n_c() const noexcept { return G.rows(); }
  Index n_z() const noexcept { return G.cols(); }

  /// Right-hand side w + F x for a fixed state.
  Vector rhs(const Vector& x) const { return w + F * x; }

  /// Largest violation max_i (G z - w - F x)_i; <= 0 means satisfied.
  double max_violation(const Vector& x, const Vector& z_u) const {
    if (n_c() == 0) return -std::numeric_limits<double>::infinity();
    return (G * z_u - rhs(x)).maxCoeff();
  }
};

inline CondensedProblem condense(const MpcProblem& p) {
  const Index nx = p.nx();
  const Index nu = p.nu();
  const int N = p.horizon();
  const Matrix& Hx = p.state_set().H();
  const Matrix& Hu = p.input_set().H();
  const Matrix& Hf = p.terminal_set().H();
  const Index ncx = Hx.rows();
  const Index ncu = Hu.rows();
  const Index ncf = Hf.rows();
  const Index nc = N * (ncu + ncx) + ncf;
  const Index nz = N * nu;

  CondensedProblem cp;
  cp.prediction = build_prediction_matrices(p.system(), N);
  cp.nx = nx;
  cp.nu = nu;
  cp.horizon = N;
  cp.G = Matrix::Zero(nc, nz);
  cp.F = Matrix::Zero(nc, nx);
  cp.w = Vector::Zero(nc);
  cp.row_labels.reserve(nc);

  const Matrix& Omega = cp.prediction.Omega;
  const Matrix& Gamma = cp.prediction.Gamma;
  Index row = 0;
  for (int i = 0; i < N; ++i) {
    cp.G.block(row, i * nu, ncu, nu) = Hu;
    cp.w.segment(row, ncu) = p.input_set().h();
    for (Index r = 0; r < ncu; ++r) cp.row_labels.push_back({RowLabel::Kind::Input, i});
    row += ncu;

    if (i == 0) {
      cp.F.block(row, 0, ncx, nx) = -Hx;
    } else {
      // x_i = A^i x + Gamma block row (i-1) z_u
      cp.G.block(row, 0, ncx, nz) = Hx * Gamma.middleRows((i - 1) * nx, nx);
      cp.F.block(row, 0, ncx, nx) = -Hx * Omega.middleRows((i - 1) * nx, nx);
    }
    cp.w.segment(row, ncx) = p.state_set().h();
    for (Index r = 0; r < ncx; ++r) cp.row_labels.push_back({RowLabel::Kind::State, i});
    row += ncx;
  }
  cp.G.block(row, 0, ncf, nz) = Hf * Gamma.middleRows((N - 1) * nx, nx);
  cp.F.block(row, 0, ncf, nx) = -Hf * Omega.middleRows((N - 1) * nx, nx);
  cp.w.segment(row, ncf) = p.terminal_set().h();
  for (Index r = 0; r < ncf; ++r) cp.row_labels.push_back({RowLabel::Kind::Terminal, N});
  return cp;
}

}  // namespace lmpc_hr
