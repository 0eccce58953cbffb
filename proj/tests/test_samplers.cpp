#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lmpc_hr/samplers/benchmark.hpp"
#include "lmpc_hr/validate/validate.hpp"
#include "support/oracles.hpp"

using namespace lmpc_hr;

namespace {

const MpcProblem& pendulum() {
  static const MpcProblem p = make_pendulum_problem();
  return p;
}

const CondensedProblem& pendulum_cp() {
  static const CondensedProblem cp = condense(pendulum());
  return cp;
}

ChainConfig config(std::uint64_t seed, std::size_t n, std::size_t burn_in = 0, std::size_t thinning = 1) {
  ChainConfig c;
  c.seed = seed;
  c.n_samples = n;
  c.burn_in = burn_in;
  c.thinning = thinning;
  return c;
}

std::vector<Vector> states_of(const RunReport& r) {
  std::vector<Vector> out;
  for (const SampleRecord& s : r.samples) out.push_back(s.x);
  return out;
}

// A = 0 with huge inputs and X_f = X: every state of X is feasible.
MpcProblem everything_feasible_problem() {
  ProblemData d = oracles::static_box_problem().data();
  d.B = Matrix::Ones(2, 1);
  const Polyhedron U = Polyhedron::box(Vector{{-100.0}}, Vector{{100.0}});
  d.Hu = U.H();
  d.hu = U.h();
  return MpcProblem(std::move(d));
}

}  // namespace

TEST(Directions, OneDimensionalSigns) {
  Rng rng(1);
  int plus = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vector d = sample_unit_direction(rng, 1);
    ASSERT_NEAR(std::abs(d(0)), 1.0, 1e-12);
    plus += d(0) > 0.0 ? 1 : 0;
  }
  EXPECT_GE(plus, 4700);
  EXPECT_LE(plus, 5300);
}

TEST(Directions, AngleHistogramIsFlat) {
  Rng rng(2);
  std::vector<int> bins(16, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vector d = sample_unit_direction(rng, 2);
    ASSERT_NEAR(d.norm(), 1.0, 1e-12);
    const double angle = std::atan2(d(1), d(0)) + std::numbers::pi;
    ++bins[std::min(15, static_cast<int>(angle / (2.0 * std::numbers::pi) * 16.0))];
  }
  for (int b : bins) {
    EXPECT_NEAR(static_cast<double>(b) / n, 1.0 / 16.0, 0.15 / 16.0);
  }
}

TEST(Rng, StreamsDifferPerMethod) {
  EXPECT_NE(derive_seed(7, MethodTag::LmpcHr), derive_seed(7, MethodTag::Uvrs));
  EXPECT_NE(derive_seed(7, MethodTag::LmpcHr), derive_seed(8, MethodTag::LmpcHr));
  EXPECT_EQ(derive_seed(7, MethodTag::BsHr), derive_seed(7, MethodTag::BsHr));
}

TEST(LmpcHr, PendulumQueryEconomics) {
  const RunReport r = lmpc_hr_run(pendulum(), config(7, 1000));
  EXPECT_EQ(r.samples.size(), 1000u);
  EXPECT_EQ(r.sampling_queries, 2000u);
  EXPECT_EQ(r.counters.boundary, 2000u);
  EXPECT_EQ(r.counters.feasibility, 0u);
  EXPECT_EQ(r.cost_per_sample(), 2.0);
  EXPECT_EQ(r.rejections, 0u);
  EXPECT_EQ(r.labeling_queries, 1000u);
}

TEST(LmpcHr, QueriesCountBurnInAndThinning) {
  const RunReport r = lmpc_hr_run(pendulum(), config(3, 50, 20, 3));
  EXPECT_EQ(r.samples.size(), 50u);
  EXPECT_EQ(r.sampling_queries, 2u * (20u + 3u * 50u));
  EXPECT_EQ(r.samples.front().chain_index, 20);
  EXPECT_EQ(r.samples[1].chain_index, 23);
}

TEST(LmpcHr, ChordEndpointsAreFeasible) {
  Rng rng(derive_seed(5, MethodTag::LmpcHr));
  Vector x = Vector::Zero(2);
  QueryCounter c;
  for (int j = 0; j < 200; ++j) {
    const Vector d = sample_unit_direction(rng, 2);
    const LmpcHrStep s = lmpc_hr_step(pendulum_cp(), x, d, rng, 1e-9, c);
    EXPECT_TRUE(is_feasible(pendulum_cp(), x + s.alpha_plus * (1.0 - 1e-9) * d));
    EXPECT_TRUE(is_feasible(pendulum_cp(), x - s.alpha_minus * (1.0 - 1e-9) * d));
    EXPECT_GE(s.beta, -s.alpha_minus);
    EXPECT_LE(s.beta, s.alpha_plus);
    x = s.next;
  }
  EXPECT_EQ(c.boundary, 400u);
}

TEST(LmpcHr, StaticBoxIsUniform) {
  const MpcProblem p = oracles::static_box_problem();
  const RunReport r = lmpc_hr_run(p, config(11, 20000, 100, 5));
  const auto counts = grid_counts_2d(states_of(r), Vector::Constant(2, -1.0), Vector::Constant(2, 1.0), 4);
  double chi2 = 0.0;
  const double expected = 20000.0 / 16.0;
  for (std::size_t c : counts) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  EXPECT_GT(chi_square_sf(chi2, 15), 0.01);
}

TEST(LmpcHr, DegenerateChordKeepsState) {
  // X_N is the segment {x2 = 0}: directions off the segment give a zero chord.
  ProblemData d = oracles::static_box_problem().data();
  Matrix Hx(6, 2);
  Hx << d.Hx, 0, 1, 0, -1;
  Vector hx(6);
  hx << d.hx, 0, 0;
  d.Hx = Hx;
  d.hx = hx;
  const MpcProblem p(std::move(d));
  const CondensedProblem cp = condense(p);
  Rng rng(1);
  QueryCounter c;
  const Vector x{{0.3, 0.0}};
  const LmpcHrStep s = lmpc_hr_step(cp, x, Vector{{0.0, 1.0}}, rng, 1e-9, c);
  EXPECT_EQ(s.alpha_plus, 0.0);
  EXPECT_EQ(s.alpha_minus, 0.0);
  EXPECT_EQ(s.next, x);
  const RunReport r = lmpc_hr_run(p, config(2, 100));
  for (const SampleRecord& rec : r.samples) EXPECT_LE(std::abs(rec.x(1)), 1e-12);
}

TEST(LmpcHr, InfeasibleInit) {
  ChainConfig cfg = config(1, 10);
  cfg.x_init = Vector{{2.5, 3.5}};
  for (MethodTag t : {MethodTag::LmpcHr, MethodTag::DrsHr, MethodTag::BsHr}) {
    try {
      run_method(pendulum(), cfg, t);
      FAIL() << to_string(t);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InfeasibleInit);
    }
  }
}

TEST(Uvrs, EverythingFeasibleMeansNoRejections) {
  const RunReport r = uvrs_run(everything_feasible_problem(), config(4, 300));
  EXPECT_EQ(r.rejections, 0u);
  EXPECT_EQ(r.sampling_queries, 300u);
}

TEST(Uvrs, RejectionLogging) {
  ChainConfig cfg = config(4, 50);
  cfg.log_rejections = true;
  const RunReport r = uvrs_run(pendulum(), cfg);
  EXPECT_EQ(r.rejected_draws.size(), r.rejections);
  EXPECT_EQ(r.sampling_queries, r.rejections + 50u);
  for (const Vector& x : r.rejected_draws) EXPECT_FALSE(is_feasible(pendulum_cp(), x));
}

TEST(DrsHr, EverythingFeasibleMeansNoRejections) {
  const RunReport r = drs_hr_run(everything_feasible_problem(), config(4, 300));
  EXPECT_EQ(r.rejections, 0u);
  EXPECT_EQ(r.sampling_queries, 300u);
}

TEST(DrsHr, NextPointLiesOnTheLine) {
  Rng rng(derive_seed(9, MethodTag::DrsHr));
  Vector x = Vector::Zero(2);
  QueryCounter c;
  for (int j = 0; j < 100; ++j) {
    const Vector d = sample_unit_direction(rng, 2);
    const DrsHrStep s = drs_hr_step(pendulum().state_set(), pendulum_cp(), x, d, rng, c);
    EXPECT_LE((s.next - (x + s.alpha * d)).cwiseAbs().maxCoeff(), 1e-10);
    const Vector delta = s.next - x;
    EXPECT_LE(std::abs(delta(0) * d(1) - delta(1) * d(0)), 1e-10);
    EXPECT_TRUE(is_feasible(pendulum_cp(), s.next));
    x = s.next;
  }
}

TEST(LineChord, BoxExits) {
  const Polyhedron X = Polyhedron::box(Vector{{-2.5, -3.5}}, Vector{{2.5, 3.5}});
  const Chord c = line_chord(X, Vector::Zero(2), Vector{{1.0, 0.0}});
  EXPECT_DOUBLE_EQ(c.plus, 2.5);
  EXPECT_DOUBLE_EQ(c.minus, 2.5);
  const Chord diag = line_chord(X, Vector{{1.0, 0.0}}, Vector{{0.0, -1.0}});
  EXPECT_DOUBLE_EQ(diag.plus, 3.5);
  EXPECT_DOUBLE_EQ(diag.minus, 3.5);
}

TEST(LineChord, UnboundedStateSet) {
  const Polyhedron X(Matrix{{1.0, 0.0}}, Vector{{1.0}});
  try {
    line_chord(X, Vector::Zero(2), Vector{{0.0, 1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnboundedStateSet);
  }
}

TEST(BsHr, TwelveQueriesForPendulumHalfWidth) {
  QueryCounter c;
  const BisectionResult r = bisect_chord_limit(pendulum_cp(), Vector::Zero(2), Vector{{1.0, 0.0}}, 2.5, 1e-3, c);
  EXPECT_EQ(r.queries, 12u);
  EXPECT_EQ(c.feasibility, 12u);
  EXPECT_EQ(bisection_iterations(2.5, 1e-3), 12u);
  EXPECT_LE(r.limit, 0.14898266693694978);
  EXPECT_GE(r.limit, 0.14898266693694978 - 1e-3);
}

TEST(BsHr, PerDirectionQueriesMatchFormula) {
  ChainConfig cfg = config(6, 100);
  const RunReport r = bs_hr_run(pendulum(), cfg, 1e-3);
  ASSERT_EQ(r.bisection_trace.size(), 100u);
  std::size_t total = 0;
  for (const BisectionTrace& t : r.bisection_trace) {
    EXPECT_EQ(t.queries_plus, bisection_iterations(t.box_plus, 1e-3));
    EXPECT_EQ(t.queries_minus, bisection_iterations(t.box_minus, 1e-3));
    total += t.queries_plus + t.queries_minus;
  }
  EXPECT_EQ(total, r.sampling_queries);
  EXPECT_EQ(r.rejections, 0u);
}

TEST(BsHr, ChordLimitsAgreeWithLpOracle) {
  Rng rng(derive_seed(13, MethodTag::BsHr));
  Vector x = Vector::Zero(2);
  QueryCounter c;
  const double eps = 1e-3;
  for (int j = 0; j < 100; ++j) {
    const Vector d = sample_unit_direction(rng, 2);
    const BsHrStep s = bs_hr_step(pendulum().state_set(), pendulum_cp(), x, d, eps, rng, c);
    const double plus = boundary_oracle(pendulum_cp(), x, d).alpha_star;
    const double minus = boundary_oracle(pendulum_cp(), x, -d).alpha_star;
    EXPECT_NEAR(s.limit_plus, plus, eps + 1e-8);
    EXPECT_NEAR(s.limit_minus, minus, eps + 1e-8);
    EXPECT_LE(s.limit_plus, plus + 1e-8);
    x = s.next;
  }
}

TEST(BsHr, RejectsNonPositiveEpsilon) {
  EXPECT_THROW(bs_hr_run(pendulum(), config(1, 5), 0.0), Error);
}

TEST(Samplers, FeasibilityClosureAndDeterminism) {
  const ChainConfig cfg = config(21, 200, 10, 1);
  for (MethodTag t : kAllMethods) {
    const RunReport a = run_method(pendulum(), cfg, t);
    const RunReport b = run_method(pendulum(), cfg, t);
    ASSERT_EQ(a.samples.size(), 200u) << to_string(t);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      EXPECT_EQ(a.samples[i].x, b.samples[i].x);
      EXPECT_EQ(a.samples[i].u0, b.samples[i].u0);
      EXPECT_EQ(a.samples[i].value, b.samples[i].value);
      EXPECT_TRUE(is_feasible(pendulum_cp(), a.samples[i].x));
      EXPECT_EQ(a.samples[i].method_tag, t);
    }
    EXPECT_EQ(a.sampling_queries, b.sampling_queries);
  }
}

TEST(Samplers, LabelsMatchDirectSolve) {
  const RunReport r = lmpc_hr_run(pendulum(), config(8, 30));
  for (const SampleRecord& s : r.samples) {
    const QpSolution q = solve_mpc(pendulum(), pendulum_cp(), s.x);
    EXPECT_NEAR(s.value, q.value, 1e-8);
    EXPECT_LE((s.u0 - q.first_input(1)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Benchmark, RowsAndOrdering) {
  const std::vector<RunReport> rows = run_benchmark(pendulum(), config(7, 300));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].method_tag, kAllMethods[i]);
    EXPECT_EQ(rows[i].samples.size(), 300u);
    EXPECT_NEAR(rows[i].cost_per_sample(), static_cast<double>(rows[i].sampling_queries) / 300.0, 1e-12);
  }
  const RunReport& lmpc = rows[3];
  EXPECT_EQ(lmpc.sampling_queries, 600u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(lmpc.cost_per_sample(), rows[i].cost_per_sample());
  const std::string table = render_table(rows);
  EXPECT_NE(table.find("LMPC-HR"), std::string::npos);
  EXPECT_NE(table.find("Solver Queries"), std::string::npos);
  EXPECT_NE(table.find("600"), std::string::npos);
}

TEST(Benchmark, ParallelMatchesSerial) {
  const ChainConfig cfg = config(5, 40);
  const auto serial = run_benchmark(pendulum(), cfg, 1e-3, false);
  const auto parallel = run_benchmark(pendulum(), cfg, 1e-3, true);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(serial[i].sampling_queries, parallel[i].sampling_queries);
    EXPECT_EQ(serial[i].samples.back().x, parallel[i].samples.back().x);
  }
}

TEST(Benchmark, SingleSample) {
  const auto rows = run_benchmark(pendulum(), config(7, 1));
  for (const RunReport& r : rows) EXPECT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(rows[3].sampling_queries, 2u);
}
