#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmpc_hr/condense.hpp"
#include "lmpc_hr/optim/oracle.hpp"
#include "lmpc_hr/optim/qp.hpp"
#include "lmpc_hr/samplers/rng.hpp"

namespace lmpc_hr {

struct ChainConfig {
  std::uint64_t seed = 0;
  std::size_t n_samples = 1000;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  double boundary_margin = 1e-9;
  std::optional<Vector> x_init;  // origin when unset
  bool log_rejections = false;   // keep rejected draws of rejection-based methods
  Tolerances tol;

  void validate() const {
    std::string why;
    if (n_samples < 1) why = "n_samples must be >= 1";
    else if (thinning < 1) why = "thinning must be >= 1";
    else if (!(boundary_margin >= 0.0 && boundary_margin < 1e-3)) why = "boundary_margin must lie in [0, 1e-3)";
    if (!why.empty()) throw Error(ErrorCode::InvalidProblem, "chain config: " + why);
  }

  Vector start(Index nx) const { return x_init ? *x_init : Vector::Zero(nx); }

  /// HR chain length: burn_in + thinning * n_samples steps.
  std::size_t chain_steps() const { return burn_in + thinning * n_samples; }
};

/// Per-step bisection bookkeeping (BS-HR only).
struct BisectionTrace {
  double box_plus = 0.0;
  double box_minus = 0.0;
  std::size_t queries_plus = 0;
  std::size_t queries_minus = 0;
};

struct RunReport {
  MethodTag method_tag = MethodTag::LmpcHr;
  std::vector<SampleRecord> samples;
  std::size_t sampling_queries = 0;
  std::size_t labeling_queries = 0;
  std::size_t rejections = 0;
  double wall_time = 0.0;
  QueryCounter counters;
  std::vector<Vector> rejected_draws;
  std::vector<BisectionTrace> bisection_trace;

  double cost_per_sample() const {
    return samples.empty() ? 0.0 : static_cast<double>(sampling_queries) / static_cast<double>(samples.size());
  }
  double rejection_rate() const {
    return sampling_queries == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(sampling_queries);
  }
};

/// Parameter range [-minus, plus] of the line x + a d inside a polyhedron.
struct Chord {
  double plus = 0.0;
  double minus = 0.0;

  double length() const noexcept { return plus + minus; }
};

/// Line/polyhedron intersection from per-facet ratios; no solver involved.
/// Throws UnboundedStateSet when the line leaves every facet on one side.
inline Chord line_chord(const Polyhedron& X, const Vector& x, const Vector& d) {
  const Vector slack = (X.h() - X.H() * x).cwiseMax(0.0);
  const Vector hd = X.H() * d;
  Chord c{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (Index i = 0; i < hd.size(); ++i) {
    if (hd(i) > 0.0) c.plus = std::min(c.plus, slack(i) / hd(i));
    else if (hd(i) < 0.0) c.minus = std::min(c.minus, slack(i) / -hd(i));
  }
  if (!std::isfinite(c.plus) || !std::isfinite(c.minus)) {
    throw Error(ErrorCode::UnboundedStateSet, "state set unbounded along the search line");
  }
  return c;
}

/// Axis-aligned bounding box of X from 2 n_x support LPs.
inline std::pair<Vector, Vector> bounding_box(const Polyhedron& X) {
  const Index n = X.dim();
  Vector lo(n), hi(n);
  const std::vector<bool> free_vars(n, false);
  for (Index i = 0; i < n; ++i) {
    for (int sign : {1, -1}) {
      Vector c = Vector::Zero(n);
      c(i) = sign;
      const LpSolution sol = lp_solve(c, X.H(), X.h(), free_vars);
      if (sol.status == LpStatus::Unbounded) {
        throw Error(ErrorCode::UnboundedStateSet, "state set unbounded along axis " + std::to_string(i));
      }
      if (sol.status == LpStatus::Infeasible) throw Error(ErrorCode::InvalidProblem, "state set is empty");
      (sign > 0 ? hi : lo)(i) = sol.objective * sign;
    }
  }
  return {lo, hi};
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Labels x with the MPC solution, warm-started from the previous label.
class Labeler {
 public:
  Labeler(const MpcProblem& p, const CondensedProblem& cp, const Tolerances& tol)
      : p_(p), cp_(cp), cost_(condensed_cost(p, cp)) {
    opt_.tol = tol;
  }

  SampleRecord label(const Vector& x, std::int64_t chain_index, MethodTag tag, QueryCounter& counter) {
    QpSolution sol = solve_mpc(p_, cp_, cost_, x, warm_, &counter, opt_);
    if (sol.status != QpStatus::Optimal) {
      throw Error(ErrorCode::InfeasibleAnchor, "labeling solve found an emitted state infeasible");
    }
    warm_ = sol.u_sequence;
    return SampleRecord{x, sol.first_input(p_.nu()), sol.value, chain_index, tag};
  }

 private:
  const MpcProblem& p_;
  const CondensedProblem& cp_;
  CondensedCost cost_;
  QpOptions opt_;
  std::optional<Vector> warm_;
};

// Shared Hit-and-Run driver. Records x_j before each step; after burn_in it
// keeps every thinning-th state. `move` maps (x, d) to the next state.
template <class Move>
RunReport run_hit_and_run(const MpcProblem& p, const CondensedProblem& cp, const ChainConfig& cfg, MethodTag tag,
                          Move&& move) {
  cfg.validate();
  Stopwatch clock;
  RunReport report;
  report.method_tag = tag;
  report.samples.reserve(cfg.n_samples);

  Vector x = cfg.start(p.nx());
  if (x.size() != p.nx()) throw Error(ErrorCode::InvalidProblem, "x_init dimension mismatch");
  QueryCounter scratch;
  if (!is_feasible(cp, x, &scratch, cfg.tol)) {
    throw Error(ErrorCode::InfeasibleInit, "initial state is outside the feasible set");
  }

  Rng rng(derive_seed(cfg.seed, tag));
  Labeler labeler(p, cp, cfg.tol);
  QueryCounter& counter = report.counters;
  const std::size_t steps = cfg.chain_steps();
  for (std::size_t j = 0; j < steps; ++j) {
    if (j >= cfg.burn_in && (j - cfg.burn_in) % cfg.thinning == 0) {
      report.samples.push_back(labeler.label(x, static_cast<std::int64_t>(j), tag, counter));
    }
    const Vector d = sample_unit_direction(rng, p.nx());
    x = move(x, d, rng, counter, report);
  }

  report.sampling_queries = counter.sampling();
  report.labeling_queries = counter.labeling;
  report.wall_time = clock.seconds();
  return report;
}

}  // namespace detail

}  // namespace lmpc_hr
