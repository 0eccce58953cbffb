#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "lmpc_hr/condense.hpp"
#include "lmpc_hr/optim/oracle.hpp"
#include "lmpc_hr/samplers/chain.hpp"

namespace lmpc_hr {

// ---------------------------------------------------------------------------
// Ground-truth membership grid
// ---------------------------------------------------------------------------

/// Feasibility of every cell center of a regular grid over the bounding box
/// of X. Cells are indexed row-major with the first coordinate slowest.
struct GridOracle {
  Vector lo;
  Vector hi;
  Index resolution = 0;
  std::vector<char> membership;
  double cell_area = 0.0;

  Index dim() const noexcept { return lo.size(); }
  std::size_t cell_count() const noexcept { return membership.size(); }

  std::size_t feasible_count() const {
    return static_cast<std::size_t>(std::count(membership.begin(), membership.end(), char{1}));
  }

  double area_estimate() const { return static_cast<double>(feasible_count()) * cell_area; }
  double box_area() const { return (hi - lo).prod(); }

  Vector cell_center(std::size_t index) const {
    Vector c(dim());
    for (Index k = dim() - 1; k >= 0; --k) {
      const auto i = static_cast<Index>(index % static_cast<std::size_t>(resolution));
      index /= static_cast<std::size_t>(resolution);
      c(k) = lo(k) + (static_cast<double>(i) + 0.5) * (hi(k) - lo(k)) / static_cast<double>(resolution);
    }
    return c;
  }

  bool contains_box(const Vector& x, double tol = 1e-12) const {
    return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
  }

  /// Cell index of a point in the box; points on the upper faces map to the
  /// last cell.
  std::size_t cell_of(const Vector& x) const {
    std::size_t index = 0;
    for (Index k = 0; k < dim(); ++k) {
      auto i = static_cast<Index>(std::floor((x(k) - lo(k)) / (hi(k) - lo(k)) * static_cast<double>(resolution)));
      i = std::clamp<Index>(i, 0, resolution - 1);
      index = index * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(i);
    }
    return index;
  }
};

inline GridOracle build_grid_oracle(const MpcProblem& p, Index resolution, const Tolerances& tol = {}) {
  if (p.nx() > 3) throw Error(ErrorCode::DimensionTooHigh, "grid oracle supports n_x <= 3");
  if (resolution < 16) throw Error(ErrorCode::InvalidProblem, "grid resolution must be >= 16");
  const CondensedProblem cp = condense(p);
  auto [lo, hi] = bounding_box(p.state_set());

  GridOracle g;
  g.lo = lo;
  g.hi = hi;
  g.resolution = resolution;
  std::size_t cells = 1;
  for (Index k = 0; k < p.nx(); ++k) cells *= static_cast<std::size_t>(resolution);
  g.cell_area = ((hi - lo) / static_cast<double>(resolution)).prod();
  g.membership.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    g.membership[i] = is_feasible(cp, g.cell_center(i), nullptr, tol) ? 1 : 0;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Chi-square machinery
// ---------------------------------------------------------------------------

/// Upper tail of the chi-square distribution, Q(dof / 2, stat / 2).
inline double chi_square_sf(double stat, double dof) {
  if (dof <= 0.0) return 1.0;
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

struct UniformityCell {
  std::size_t id = 0;
  double expected_probability = 0.0;
  std::size_t observed = 0;
};

struct UniformityReport {
  std::vector<UniformityCell> cells;
  double chi2_statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t n_effective = 0;
};

/// Group id of every oracle cell: contiguous index ranges holding near-equal
/// numbers of feasible cells. Infeasible cells join the range they fall in,
/// so every point of the box has a group.
inline std::vector<std::size_t> equal_probability_groups(const GridOracle& oracle, std::size_t n_groups) {
  const std::size_t feasible = oracle.feasible_count();
  if (n_groups == 0 || feasible < n_groups) {
    throw Error(ErrorCode::InsufficientSamples, "fewer feasible oracle cells than requested groups");
  }
  std::vector<std::size_t> group(oracle.cell_count());
  std::size_t seen = 0;
  std::size_t current = 0;
  for (std::size_t i = 0; i < oracle.cell_count(); ++i) {
    if (oracle.membership[i]) {
      current = std::min(n_groups - 1, seen * n_groups / feasible);
      ++seen;
    }
    group[i] = current;
  }
  return group;
}

/// Pearson chi-square of the samples against the uniform law on the feasible
/// cells, aggregated into n_cells equal-probability groups.
inline UniformityReport uniformity_test(const std::vector<Vector>& samples, const GridOracle& oracle,
                                        std::size_t n_cells) {
  if (n_cells < 10) throw Error(ErrorCode::InvalidProblem, "uniformity_test needs n_cells >= 10");
  const std::vector<std::size_t> group = equal_probability_groups(oracle, n_cells);

  std::vector<std::size_t> feasible_in(n_cells, 0);
  for (std::size_t i = 0; i < group.size(); ++i) feasible_in[group[i]] += oracle.membership[i] ? 1 : 0;
  const double total_feasible = static_cast<double>(oracle.feasible_count());

  std::vector<std::size_t> observed(n_cells, 0);
  for (const Vector& x : samples) {
    if (!oracle.contains_box(x, 1e-9)) throw Error(ErrorCode::InvalidProblem, "sample outside the oracle box");
    ++observed[group[oracle.cell_of(x)]];
  }

  UniformityReport rep;
  rep.n_effective = samples.size();
  const double n = static_cast<double>(samples.size());
  for (std::size_t g = 0; g < n_cells; ++g) {
    const double prob = static_cast<double>(feasible_in[g]) / total_feasible;
    const double expected = prob * n;
    if (expected < 5.0) {
      throw Error(ErrorCode::InsufficientSamples, "expected count below 5 in cell " + std::to_string(g));
    }
    rep.cells.push_back({g, prob, observed[g]});
    const double diff = static_cast<double>(observed[g]) - expected;
    rep.chi2_statistic += diff * diff / expected;
  }
  rep.dof = static_cast<int>(n_cells) - 1;
  rep.p_value = chi_square_sf(rep.chi2_statistic, rep.dof);
  return rep;
}

/// Counts on a regular bins^2 grid over [lo, hi] (first two coordinates).
inline std::vector<std::size_t> grid_counts_2d(const std::vector<Vector>& samples, const Vector& lo, const Vector& hi,
                                               Index bins) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins * bins), 0);
  for (const Vector& x : samples) {
    Index idx = 0;
    for (Index k = 0; k < 2; ++k) {
      auto i = static_cast<Index>(std::floor((x(k) - lo(k)) / (hi(k) - lo(k)) * static_cast<double>(bins)));
      idx = idx * bins + std::clamp<Index>(i, 0, bins - 1);
    }
    ++counts[static_cast<std::size_t>(idx)];
  }
  return counts;
}

struct HomogeneityReport {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t cells_used = 0;
};

/// Two-sample chi-square homogeneity over paired cell counts. Empty cells are
/// dropped; cells whose expected count falls below 5 in either sample are
/// pooled into one bucket.
inline HomogeneityReport chi_square_homogeneity(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidProblem, "homogeneity: count vectors differ in length");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::size_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::size_t{0}));
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::InsufficientSamples, "homogeneity: empty sample");
  const double fa = na / (na + nb);
  const double fb = nb / (na + nb);

  std::vector<std::pair<double, double>> cells;
  double pooled_a = 0.0;
  double pooled_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double total = static_cast<double>(a[i] + b[i]);
    if (total == 0.0) continue;
    if (total * std::min(fa, fb) < 5.0) {
      pooled_a += static_cast<double>(a[i]);
      pooled_b += static_cast<double>(b[i]);
    } else {
      cells.emplace_back(static_cast<double>(a[i]), static_cast<double>(b[i]));
    }
  }
  if (pooled_a + pooled_b > 0.0) cells.emplace_back(pooled_a, pooled_b);

  HomogeneityReport rep;
  rep.cells_used = cells.size();
  for (const auto& [ca, cb] : cells) {
    const double total = ca + cb;
    const double ea = total * fa;
    const double eb = total * fb;
    rep.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  rep.dof = static_cast<int>(cells.size()) - 1;
  rep.p_value = chi_square_sf(rep.statistic, rep.dof);
  return rep;
}

// ---------------------------------------------------------------------------
// Bisection reference for the boundary oracle
// ---------------------------------------------------------------------------

struct BisectionReference {
  double alpha = 0.0;  // feasible bracket end
  double exit = 0.0;   // line/X exit that seeded the bracket
  std::size_t iterations = 0;
};

/// Deterministic bisection over feasibility_check on [0, exit], where exit is
/// the line's exit from X read off the STATE(0) rows of `cp`.
inline BisectionReference bisection_reference(const CondensedProblem& cp, const Vector& x, const Vector& d,
                                              double epsilon, const Tolerances& tol = {}) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidProblem, "bisection epsilon must be > 0");
  BisectionReference ref;
  ref.exit = std::numeric_limits<double>::infinity();
  for (Index r = 0; r < cp.n_c(); ++r) {
    if (!(cp.row_labels[r] == RowLabel{RowLabel::Kind::State, 0})) continue;
    // H_x row = -F row, h_x = w.
    const double hd = -cp.F.row(r).dot(d);
    const double slack = std::max(0.0, cp.w(r) + cp.F.row(r).dot(x));
    if (hd > 0.0) ref.exit = std::min(ref.exit, slack / hd);
  }
  if (!std::isfinite(ref.exit)) throw Error(ErrorCode::UnboundedStateSet, "state set unbounded along d");

  double feasible_end = 0.0;
  double infeasible_end = ref.exit;
  while (infeasible_end - feasible_end > epsilon) {
    const double mid = feasible_end + 0.5 * (infeasible_end - feasible_end);
    ++ref.iterations;
    if (feasibility_check(cp, x + mid * d, nullptr, tol) == Feasibility::Feasible) feasible_end = mid;
    else infeasible_end = mid;
  }
  ref.alpha = feasible_end;
  return ref;
}

/// ceil(log2(length / epsilon)), clamped at zero.
inline std::size_t bisection_iterations(double length, double epsilon) {
  if (length <= epsilon) return 0;
  return static_cast<std::size_t>(std::ceil(std::log2(length / epsilon)));
}

}  // namespace lmpc_hr
