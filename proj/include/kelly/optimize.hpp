#pragma once

// Maximization of growth over the investment fraction and the rebalancing
// period, plus the closed-form small-parameter approximations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "kelly/assets.hpp"
#include "kelly/errors.hpp"
#include "kelly/growth.hpp"
#include "kelly/mechanics.hpp"
#include "kelly/parallel.hpp"

namespace kelly {

struct FractionOptimum {
  double f_star = 0.0;
  double G_star = 0.0;
};

struct Optimum {
  double f_star = 0.0;
  std::optional<int> T_star;
  double G_star = 0.0;
};

inline constexpr int coarse_grid_points = 101;

/// Maximizes growth over f in [0, 1]: a 101-point scan picks the best grid
/// cell, then golden-section search refines inside its two neighbours. The
/// result never falls below the best grid value. If every grid value is
/// -inf (ruin everywhere) the convention f* = 0, G* = 0 applies.
template <class Growth>
FractionOptimum maximize_fraction(const Growth& growth, double tol = 1e-8) {
  detail::require(tol > 0.0, "tolerance must be positive");
  constexpr int last = coarse_grid_points - 1;
  std::array<double, coarse_grid_points> values{};
  int best = -1;
  for (int i = 0; i <= last; ++i) {
    values[i] = growth(static_cast<double>(i) / last);
    if (values[i] == minus_infinity) continue;
    if (best < 0 || values[i] > values[best]) best = i;
  }
  if (best < 0) return {0.0, 0.0};

  FractionOptimum result{static_cast<double>(best) / last, values[best]};
  double a = static_cast<double>(std::max(best - 1, 0)) / last;
  double b = static_cast<double>(std::min(best + 1, last)) / last;
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = growth(c);
  double gd = growth(d);
  while (b - a > tol) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = growth(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = growth(d);
    }
  }
  const double f_mid = 0.5 * (a + b);
  const double g_mid = growth(f_mid);
  if (g_mid > result.G_star) result = {f_mid, g_mid};
  return result;
}

struct PeriodPoint {
  int period = 1;
  double f_star = 0.0;
  double G_star = 0.0;
};

struct PeriodSearch {
  std::vector<PeriodPoint> table;  ///< one row per period 1..T_max
  Optimum best;
};

/// Exhaustive search over T = 1..t_max of max_f G(f; T) per step. `objective`
/// maps a period to a growth function of f. Ties go to the smaller period.
template <class ObjectiveFactory>
PeriodSearch maximize_period(const ObjectiveFactory& objective, int t_max, unsigned threads = 0) {
  detail::require(t_max >= 1, "T_max must be at least 1");
  PeriodSearch search;
  search.table.resize(static_cast<std::size_t>(t_max));
  parallel_for(search.table.size(), threads, [&](std::size_t i) {
    const int period = static_cast<int>(i) + 1;
    const auto opt = maximize_fraction(objective(period));
    search.table[i] = {period, opt.f_star, opt.G_star};
  });
  const PeriodPoint* best = &search.table.front();
  for (const auto& row : search.table) {
    if (row.G_star > best->G_star) best = &row;
  }
  search.best = {best->f_star, best->period, best->G_star};
  return search;
}

inline PeriodSearch maximize_period(const BinaryAsset& asset, const FeeSchedule& fee, int t_max, unsigned threads = 0) {
  validate(asset);
  return maximize_period([&](int period) { return binary_growth_fn(asset, period, fee); }, t_max, threads);
}

inline PeriodSearch maximize_period(const TwoScaleAsset& asset, const FeeSchedule& fee, int t_max, unsigned threads = 0) {
  validate(asset);
  return maximize_period([&](int period) { return two_scale_growth_fn(asset, period, fee); }, t_max, threads);
}

inline PeriodSearch maximize_period(const LognormalAsset& asset, const FeeSchedule& fee, int t_max, unsigned threads = 0) {
  return maximize_period([&](int period) { return lognormal_growth_fn(asset, period, fee); }, t_max, threads);
}

// ---------------------------------------------------------------------------
// Closed forms

struct ClosedFormFraction {
  double value = 0.0;
  bool clamped = false;
};

namespace detail {

inline ClosedFormFraction clamp_fraction(double raw) {
  const double v = std::clamp(raw, 0.0, 1.0);
  return {v, v != raw};
}

inline void require_binary_params(double p1, double r1, double alpha) {
  require(r1 > 0.0 && r1 <= 1.0, "r1 must lie in (0, 1]");
  require(p1 > -0.5 && p1 <= 0.5, "p1 must lie in (-1/2, 1/2]");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
}

}  // namespace detail

/// Fee-corrected optimal fraction for per-step rebalancing, (2 P1 - alpha) / (r1 - 2 alpha).
inline ClosedFormFraction approx_f1(double p1, double r1, double alpha) {
  detail::require_binary_params(p1, r1, alpha);
  detail::require(r1 > 2.0 * alpha, "approx_f1 requires r1 > 2 alpha");
  return detail::clamp_fraction((2.0 * p1 - alpha) / (r1 - 2.0 * alpha));
}

/// Approximate optimal fraction when rebalancing every `period` in {1, 2, 3, 4} steps.
inline ClosedFormFraction approx_f_period(int period, double p1, double r1, double alpha) {
  detail::require_binary_params(p1, r1, alpha);
  double num = 0.0;
  double den = 0.0;
  switch (period) {
    case 1:
      return approx_f1(p1, r1, alpha);
    case 2:
      num = 8.0 * p1 - alpha * (2.0 + r1);
      den = 4.0 * r1 - 2.0 * alpha * (2.0 + r1);
      break;
    case 3:
      num = 2.0 * p1 - 0.5 * alpha;
      den = r1 - 2.0 * alpha;
      break;
    case 4:
      num = 32.0 * p1 - 3.0 * alpha * (2.0 + r1);
      den = 16.0 * r1 - 6.0 * alpha * (2.0 + r1);
      break;
    default:
      throw parameter_error("closed-form fraction exists only for periods 1 to 4");
  }
  detail::require(den > 0.0, "closed-form fraction denominator must be positive");
  return detail::clamp_fraction(num / den);
}

/// Fees at which two rebalancing periods are equally profitable:
/// x = 1 vs 2, y = 2 vs 3, z = 2 vs 4.
struct ThresholdFees {
  double alpha_x = 0.0;
  double alpha_y = 0.0;
  double alpha_z = 0.0;
};

inline ThresholdFees threshold_fees(double p1, double r1) {
  detail::require(r1 > 0.0 && r1 <= 1.0, "r1 must lie in (0, 1]");
  detail::require(p1 > 0.0 && p1 <= 0.5 * r1, "thresholds need 0 < p1 <= r1/2");
  const double gap = r1 - 2.0 * p1;
  return {2.0 * r1 * p1 * gap / (2.0 - r1), 2.0 * p1 * gap, 16.0 * p1 * r1 * gap / (2.0 + r1)};
}

/// Optimal per-step growth when rebalancing every `period` steps.
inline double optimal_binary_growth(const BinaryAsset& asset, int period, double alpha) {
  return maximize_fraction(binary_growth_fn(asset, period, FeeSchedule{alpha})).G_star;
}

/// Fee at which rebalancing every `short_period` and every `long_period` steps
/// yield the same optimal per-step growth, found by bracketing and TOMS 748 on
/// exact growth. Returns 0 when the two are already equal without fees.
inline double threshold_fee_numeric(const BinaryAsset& asset, int short_period, int long_period) {
  validate(asset);
  detail::require(short_period >= 1 && long_period > short_period, "need short_period < long_period");
  const auto gap = [&](double alpha) {
    return optimal_binary_growth(asset, short_period, alpha) - optimal_binary_growth(asset, long_period, alpha);
  };
  const double g0 = gap(0.0);
  if (g0 <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1e-6;
  double g_hi = gap(hi);
  while (g_hi > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi >= 0.5) throw numerical_error("no fee threshold below alpha = 0.5");
    g_hi = gap(hi);
  }
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(gap, lo, hi, gap(lo), g_hi,
                                                      boost::math::tools::eps_tolerance<double>(36), iterations);
  return 0.5 * (root.first + root.second);
}

// ---------------------------------------------------------------------------
// Lognormal small-parameter results

struct LognormalClosedForms {
  double f_star = 0.0;          ///< clamped to [0, 1]
  bool f_clamped = false;
  double G_star = 0.0;          ///< optimal per-step growth, per-step rebalancing
  double T_star = 0.0;          ///< real-valued optimal period
  int T_star_rounded = 1;       ///< nearest integer >= 1
};

namespace detail {

inline void require_interior(double m, double d) {
  require(d > 0.0, "d must be positive");
  require(std::fabs(m) < 0.5 * d, "closed forms need |m| < D/2");
}

inline double fee_free_optimal_growth(double m, double d) {
  const double lean = 0.5 + m / d;
  const double spread = 0.25 - m * m / (d * d);
  return 0.5 * d * lean * lean - 0.25 * d * d * spread * spread;
}

}  // namespace detail

inline LognormalClosedForms lognormal_closed_forms(double m, double d, double alpha) {
  detail::require_interior(m, d);
  detail::require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  const double spread = 0.25 - m * m / (d * d);
  LognormalClosedForms out;
  const auto f = detail::clamp_fraction(0.5 + m / d + alpha * m * std::sqrt(8.0 / (std::numbers::pi * d * d * d)));
  out.f_star = f.value;
  out.f_clamped = f.clamped;
  out.G_star = detail::fee_free_optimal_growth(m, d) - alpha * spread * std::sqrt(2.0 * d / std::numbers::pi);
  out.T_star = std::pow(alpha, 2.0 / 3.0) / d * std::sqrt(8.0 / std::numbers::pi) * std::pow(spread, -2.0 / 3.0);
  out.T_star_rounded = std::max(1, static_cast<int>(std::lround(out.T_star)));
  return out;
}

/// Approximate optimal per-step growth when rebalancing every `period` steps
/// with fee alpha (window parameters T m, T D).
inline double lognormal_period_growth(double m, double d, int period, double alpha) {
  detail::require_interior(m, d);
  detail::require(period >= 1, "period must be at least 1");
  const double spread = 0.25 - m * m / (d * d);
  const double window_d = d * period;
  const double window = detail::fee_free_optimal_growth(m * period, window_d) -
                        alpha * spread * std::sqrt(2.0 * window_d / std::numbers::pi);
  return window / period;
}

}  // namespace kelly
