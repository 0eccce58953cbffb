#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "lmpc_hr/samplers/chain.hpp"

namespace lmpc_hr {

// ---------------------------------------------------------------------------
// Single-step kernels. Each maps the current state and a unit direction to
// the next chain state and charges its solver calls to `counter`.
// ---------------------------------------------------------------------------

struct LmpcHrStep {
  Vector next;
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double beta = 0.0;
};

/// Exact chord from two boundary LPs, then a uniform step along it. The chord
/// is shrunk by (1 - margin) so the next anchor stays interior.
inline LmpcHrStep lmpc_hr_step(const CondensedProblem& cp, const Vector& x, const Vector& d, Rng& rng,
                               double margin, QueryCounter& counter, const Tolerances& tol = {}) {
  LmpcHrStep s;
  s.alpha_plus = boundary_oracle(cp, x, d, &counter, tol).alpha_star;
  s.alpha_minus = boundary_oracle(cp, x, -d, &counter, tol).alpha_star;
  const double shrink = 1.0 - margin;
  s.beta = uniform(rng, -s.alpha_minus * shrink, s.alpha_plus * shrink);
  s.next = x + s.beta * d;
  return s;
}

inline constexpr std::size_t kResampleCap = 100000;

struct DrsHrStep {
  Vector next;
  double alpha = 0.0;
  std::size_t rejections = 0;
};

/// Directional rejection: draw uniformly on the line/X chord until the MPC
/// is feasible, resampling on the same segment.
inline DrsHrStep drs_hr_step(const Polyhedron& X, const CondensedProblem& cp, const Vector& x, const Vector& d,
                             Rng& rng, QueryCounter& counter, const Tolerances& tol = {},
                             std::vector<Vector>* rejected = nullptr) {
  const Chord chord = line_chord(X, x, d);
  DrsHrStep s;
  for (;;) {
    s.alpha = uniform(rng, -chord.minus, chord.plus);
    Vector candidate = x + s.alpha * d;
    if (is_feasible(cp, candidate, &counter, tol)) {
      s.next = std::move(candidate);
      return s;
    }
    if (rejected) rejected->push_back(std::move(candidate));
    if (++s.rejections >= kResampleCap) {
      throw Error(ErrorCode::ResampleCapExceeded,
                  std::to_string(kResampleCap) + " consecutive rejections on one segment");
    }
  }
}

struct BisectionResult {
  double limit = 0.0;  // feasible bracket end
  std::size_t queries = 0;
};

/// Bisection for the last feasible step along d inside [0, box_exit]; each
/// midpoint test is one feasibility query. Stops once the bracket width is
/// at most epsilon.
inline BisectionResult bisect_chord_limit(const CondensedProblem& cp, const Vector& x, const Vector& d,
                                          double box_exit, double epsilon, QueryCounter& counter,
                                          const Tolerances& tol = {}) {
  BisectionResult r;
  double lo = 0.0;
  double hi = box_exit;
  while (hi - lo > epsilon) {
    const double mid = 0.5 * (lo + hi);
    ++r.queries;
    if (is_feasible(cp, x + mid * d, &counter, tol)) lo = mid;
    else hi = mid;
  }
  r.limit = lo;
  return r;
}

struct BsHrStep {
  Vector next;
  BisectionTrace trace;
  double limit_plus = 0.0;
  double limit_minus = 0.0;
};

inline BsHrStep bs_hr_step(const Polyhedron& X, const CondensedProblem& cp, const Vector& x, const Vector& d,
                           double epsilon, Rng& rng, QueryCounter& counter, const Tolerances& tol = {}) {
  const Chord box = line_chord(X, x, d);
  const BisectionResult plus = bisect_chord_limit(cp, x, d, box.plus, epsilon, counter, tol);
  const BisectionResult minus = bisect_chord_limit(cp, x, -d, box.minus, epsilon, counter, tol);
  BsHrStep s;
  s.trace = {box.plus, box.minus, plus.queries, minus.queries};
  s.limit_plus = plus.limit;
  s.limit_minus = minus.limit;
  s.next = x + uniform(rng, -minus.limit, plus.limit) * d;
  return s;
}

// ---------------------------------------------------------------------------
// Full runs.
// ---------------------------------------------------------------------------

/// Hit-and-Run with the LP boundary oracle: exactly two boundary LPs per step.
inline RunReport lmpc_hr_run(const MpcProblem& p, const ChainConfig& cfg) {
  const CondensedProblem cp = condense(p);
  return detail::run_hit_and_run(
      p, cp, cfg, MethodTag::LmpcHr, [&](const Vector& x, const Vector& d, Rng& rng, QueryCounter& c, RunReport&) {
        return lmpc_hr_step(cp, x, d, rng, cfg.boundary_margin, c, cfg.tol).next;
      });
}

inline RunReport drs_hr_run(const MpcProblem& p, const ChainConfig& cfg) {
  const CondensedProblem cp = condense(p);
  const Polyhedron& X = p.state_set();
  return detail::run_hit_and_run(
      p, cp, cfg, MethodTag::DrsHr, [&](const Vector& x, const Vector& d, Rng& rng, QueryCounter& c, RunReport& rep) {
        DrsHrStep s = drs_hr_step(X, cp, x, d, rng, c, cfg.tol, cfg.log_rejections ? &rep.rejected_draws : nullptr);
        rep.rejections += s.rejections;
        return s.next;
      });
}

inline RunReport bs_hr_run(const MpcProblem& p, const ChainConfig& cfg, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidProblem, "bisection epsilon must be > 0");
  const CondensedProblem cp = condense(p);
  const Polyhedron& X = p.state_set();
  return detail::run_hit_and_run(
      p, cp, cfg, MethodTag::BsHr, [&](const Vector& x, const Vector& d, Rng& rng, QueryCounter& c, RunReport& rep) {
        BsHrStep s = bs_hr_step(X, cp, x, d, epsilon, rng, c, cfg.tol);
        rep.bisection_trace.push_back(s.trace);
        return s.next;
      });
}

/// Volumetric rejection over the bounding box of X; i.i.d. draws, so burn-in,
/// thinning and x_init do not apply.
inline RunReport uvrs_run(const MpcProblem& p, const ChainConfig& cfg) {
  cfg.validate();
  detail::Stopwatch clock;
  const CondensedProblem cp = condense(p);
  const auto [lo, hi] = bounding_box(p.state_set());

  RunReport report;
  report.method_tag = MethodTag::Uvrs;
  report.samples.reserve(cfg.n_samples);
  Rng rng(derive_seed(cfg.seed, MethodTag::Uvrs));
  detail::Labeler labeler(p, cp, cfg.tol);
  QueryCounter& counter = report.counters;

  std::int64_t draw = 0;
  while (report.samples.size() < cfg.n_samples) {
    Vector x(p.nx());
    for (Index i = 0; i < x.size(); ++i) x(i) = uniform(rng, lo(i), hi(i));
    if (is_feasible(cp, x, &counter, cfg.tol)) {
      report.samples.push_back(labeler.label(x, draw, MethodTag::Uvrs, counter));
    } else {
      ++report.rejections;
      if (cfg.log_rejections) report.rejected_draws.push_back(std::move(x));
    }
    ++draw;
  }
  report.sampling_queries = counter.sampling();
  report.labeling_queries = counter.labeling;
  report.wall_time = clock.seconds();
  return report;
}

inline constexpr double kDefaultBisectionEpsilon = 1e-3;

inline RunReport run_method(const MpcProblem& p, const ChainConfig& cfg, MethodTag tag,
                            double epsilon = kDefaultBisectionEpsilon) {
  switch (tag) {
    case MethodTag::LmpcHr: return lmpc_hr_run(p, cfg);
    case MethodTag::Uvrs: return uvrs_run(p, cfg);
    case MethodTag::DrsHr: return drs_hr_run(p, cfg);
    case MethodTag::BsHr: return bs_hr_run(p, cfg, epsilon);
  }
  throw Error(ErrorCode::InvalidProblem, "unknown method");
}

}  // namespace lmpc_hr
