#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmpc_hr/error.hpp"

namespace lmpc_hr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

// Relative eigenvalue threshold shared by the PSD / PD checks.
inline constexpr double kDefinitenessTol = 1e-9;

inline bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= kDefinitenessTol * scale;
}

// Smallest eigenvalue relative to the largest absolute eigenvalue. A zero
// matrix yields 0.
inline double relative_min_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  if (largest == 0.0) return 0.0;
  return ev.minCoeff() / largest;
}

}  // namespace detail

/// Discrete-time dynamics x+ = A x + B u.
class LinearSystem {
 public:
  LinearSystem(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
    auto v = violations(a_, b_);
    if (!v.empty()) throw Error(ErrorCode::InvalidProblem, detail::join(v));
  }

  static std::vector<std::string> violations(const Matrix& a, const Matrix& b) {
    std::vector<std::string> out;
    if (a.rows() < 1 || a.rows() != a.cols()) out.emplace_back("dimension mismatch: A must be square with n_x >= 1");
    if (b.rows() != a.rows()) out.emplace_back("dimension mismatch: B row count must equal n_x");
    if (b.cols() < 1) out.emplace_back("dimension mismatch: B must have n_u >= 1 columns");
    if (!detail::all_finite(a) || !detail::all_finite(b)) out.emplace_back("non-finite entry in A or B");
    return out;
  }

  const Matrix& A() const noexcept { return a_; }
  const Matrix& B() const noexcept { return b_; }
  Index nx() const noexcept { return a_.rows(); }
  Index nu() const noexcept { return b_.cols(); }

  Vector step(const Vector& x, const Vector& u) const { return a_ * x + b_ * u; }

 private:
  Matrix a_;
  Matrix b_;
};

/// Inequality description {z | H z <= h}.
class Polyhedron {
 public:
  Polyhedron(Matrix h_mat, Vector h_vec) : H_(std::move(h_mat)), h_(std::move(h_vec)) {
    auto v = violations(H_, h_);
    if (!v.empty()) throw Error(ErrorCode::InvalidProblem, detail::join(v));
  }

  /// Axis-aligned box lo <= z <= hi as [I; -I] z <= [hi; -lo].
  static Polyhedron box(const Vector& lo, const Vector& hi) {
    const Index n = lo.size();
    Matrix H(2 * n, n);
    H << Matrix::Identity(n, n), -Matrix::Identity(n, n);
    Vector h(2 * n);
    h << hi, -lo;
    return Polyhedron(std::move(H), std::move(h));
  }

  static std::vector<std::string> violations(const Matrix& H, const Vector& h, std::string_view name = "polyhedron") {
    std::vector<std::string> out;
    if (H.rows() != h.size()) {
      out.push_back("dimension mismatch: " + std::string(name) + " H and h row counts differ");
      return out;
    }
    if (!detail::all_finite(H) || !h.allFinite()) out.push_back("non-finite entry in " + std::string(name));
    for (Index i = 0; i < H.rows(); ++i) {
      if (H.row(i).isZero(0.0) && h(i) < 0.0) {
        out.push_back("inconsistent zero row " + std::to_string(i) + " in " + std::string(name));
      }
    }
    return out;
  }

  const Matrix& H() const noexcept { return H_; }
  const Vector& h() const noexcept { return h_; }
  Index facets() const noexcept { return H_.rows(); }
  Index dim() const noexcept { return H_.cols(); }

  bool contains(const Vector& z, double tol = 0.0) const {
    return ((H_ * z - h_).array() <= tol).all();
  }

 private:
  Matrix H_;
  Vector h_;
};

/// Raw, unvalidated problem description as read from a problem file.
struct ProblemData {
  Matrix A, B;
  int horizon = 0;
  Matrix Q, R, P;
  Matrix Hx;
  Vector hx;
  Matrix Hu;
  Vector hu;
  Matrix Hf;
  Vector hf;
};

/// Every invariant violation of a raw problem; empty means valid.
inline std::vector<std::string> validate_problem(const ProblemData& d) {
  std::vector<std::string> out = LinearSystem::violations(d.A, d.B);
  auto append = [&out](std::vector<std::string> more) {
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  };
  const Index nx = d.A.rows();
  const Index nu = d.B.cols();

  if (d.horizon < 1) out.emplace_back("horizon N must be >= 1");

  append(Polyhedron::violations(d.Hx, d.hx, "state set"));
  append(Polyhedron::violations(d.Hu, d.hu, "input set"));
  append(Polyhedron::violations(d.Hf, d.hf, "terminal set"));
  if (d.Hx.cols() != nx) out.emplace_back("dimension mismatch: state set ambient dimension must equal n_x");
  if (d.Hu.cols() != nu) out.emplace_back("dimension mismatch: input set ambient dimension must equal n_u");
  if (d.Hf.cols() != nx) out.emplace_back("dimension mismatch: terminal set ambient dimension must equal n_x");

  auto check_cost = [&](const Matrix& m, Index n, std::string_view name, bool definite) {
    if (m.rows() != n || m.cols() != n) {
      out.push_back("dimension mismatch: " + std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
      return;
    }
    if (!detail::all_finite(m)) {
      out.push_back("non-finite entry in " + std::string(name));
      return;
    }
    if (!detail::is_symmetric(m)) {
      out.push_back(std::string(name) + " not symmetric");
      return;
    }
    const double rel_min = detail::relative_min_eigenvalue(m);
    if (definite) {
      if (!(rel_min > detail::kDefinitenessTol)) out.push_back(std::string(name) + " not positive definite");
    } else if (rel_min < -detail::kDefinitenessTol) {
      out.push_back(std::string(name) + " not positive semidefinite");
    }
  };
  check_cost(d.Q, nx, "Q", false);
  check_cost(d.R, nu, "R", true);
  check_cost(d.P, nx, "P", false);
  return out;
}

/// A validated linear MPC problem. Immutable after construction.
class MpcProblem {
 public:
  explicit MpcProblem(ProblemData data)
      : data_(checked(std::move(data))),
        system_(data_.A, data_.B),
        state_set_(data_.Hx, data_.hx),
        input_set_(data_.Hu, data_.hu),
        terminal_set_(data_.Hf, data_.hf) {}

  const LinearSystem& system() const noexcept { return system_; }
  int horizon() const noexcept { return data_.horizon; }
  const Polyhedron& state_set() const noexcept { return state_set_; }
  const Polyhedron& input_set() const noexcept { return input_set_; }
  const Polyhedron& terminal_set() const noexcept { return terminal_set_; }
  const Matrix& Q() const noexcept { return data_.Q; }
  const Matrix& R() const noexcept { return data_.R; }
  const Matrix& P() const noexcept { return data_.P; }
  Index nx() const noexcept { return system_.nx(); }
  Index nu() const noexcept { return system_.nu(); }
  const ProblemData& data() const noexcept { return data_; }

 private:
  static ProblemData checked(ProblemData d) {
    auto v = validate_problem(d);
    if (!v.empty()) throw Error(ErrorCode::InvalidProblem, detail::join(v));
    return d;
  }

  ProblemData data_;
  LinearSystem system_;
  Polyhedron state_set_;
  Polyhedron input_set_;
  Polyhedron terminal_set_;
};

inline std::vector<std::string> validate_problem(const MpcProblem& p) { return validate_problem(p.data()); }

/// The linear inverted pendulum benchmark: N = 15, l(x,u) = x'x + u^2, V_f = 0,
/// |theta| <= 2.5, |theta_dot| <= 3.5, |u| <= 2, terminal set {0}.
inline MpcProblem make_pendulum_problem() {
  ProblemData d;
  d.A = Matrix(2, 2);
  d.A << 1.0, 0.1,
         0.981, 0.1;
  d.B = Matrix(2, 1);
  d.B << 0.0, 0.1;
  d.horizon = 15;
  d.Q = Matrix::Identity(2, 2);
  d.R = Matrix::Identity(1, 1);
  d.P = Matrix::Zero(2, 2);

  const Polyhedron X = Polyhedron::box(Vector{{-2.5, -3.5}}, Vector{{2.5, 3.5}});
  const Polyhedron U = Polyhedron::box(Vector{{-2.0}}, Vector{{2.0}});
  const Polyhedron Xf = Polyhedron::box(Vector::Zero(2), Vector::Zero(2));
  d.Hx = X.H();
  d.hx = X.h();
  d.Hu = U.H();
  d.hu = U.h();
  d.Hf = Xf.H();
  d.hf = Xf.h();
  return MpcProblem(std::move(d));
}

enum class MethodTag { LmpcHr, Uvrs, DrsHr, BsHr };

inline constexpr MethodTag kAllMethods[] = {MethodTag::Uvrs, MethodTag::DrsHr, MethodTag::BsHr, MethodTag::LmpcHr};

constexpr std::string_view to_string(MethodTag tag) {
  switch (tag) {
    case MethodTag::LmpcHr: return "LMPC-HR";
    case MethodTag::Uvrs: return "UVRS";
    case MethodTag::DrsHr: return "DRS-HR";
    case MethodTag::BsHr: return "BS-HR";
  }
  return "?";
}

/// CLI spelling: lmpc-hr, uvrs, drs-hr, bs-hr.
constexpr std::string_view cli_name(MethodTag tag) {
  switch (tag) {
    case MethodTag::LmpcHr: return "lmpc-hr";
    case MethodTag::Uvrs: return "uvrs";
    case MethodTag::DrsHr: return "drs-hr";
    case MethodTag::BsHr: return "bs-hr";
  }
  return "?";
}

inline std::optional<MethodTag> parse_method(std::string_view s) {
  for (MethodTag t : kAllMethods) {
    if (s == cli_name(t) || s == to_string(t)) return t;
  }
  return std::nullopt;
}

/// One labeled dataset entry s(x) = (x, pi_MPC(x)) plus its optimal cost.
struct SampleRecord {
  Vector x;
  Vector u0;
  double value = 0.0;
  std::int64_t chain_index = 0;
  MethodTag method_tag = MethodTag::LmpcHr;
};

}  // namespace lmpc_hr
