#pragma once

// Expected exponential growth rate G(f) per time step.
//
// Binary and two-scale assets are summed exactly over their compound outcome
// distributions; lognormal assets are integrated numerically. Ruin (any
// reachable outcome with a non-positive wealth factor) is encoded as -inf.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kelly/assets.hpp"
#include "kelly/errors.hpp"
#include "kelly/mechanics.hpp"

namespace kelly {

inline constexpr double minus_infinity = -std::numeric_limits<double>::infinity();

/// Longest window summed exactly; longer binary windows use the lognormal surrogate.
inline constexpr int max_exact_period = 10'000;

struct GrowthEstimate {
  double G = 0.0;                  ///< nats per step
  double R = 0.0;                  ///< exp(G) - 1
  std::optional<double> stderr_;   ///< Monte-Carlo standard error, when sampled
};

inline double long_term_return(double growth) { return std::expm1(growth); }

inline GrowthEstimate make_estimate(double growth, std::optional<double> standard_error = std::nullopt) {
  return {growth, long_term_return(growth), standard_error};
}

/// E[ln wealth factor] over one rebalancing window (not divided by its length).
inline double window_log_growth(const OutcomeDistribution& dist, double f, const FeeSchedule& fee) {
  double sum = 0.0;
  for (const auto& o : dist.entries) {
    if (o.prob == 0.0) continue;
    // Fully invested portfolios never trade, so the exact log return applies.
    const double lg = f == 1.0 ? o.log_growth : log_wealth_factor(f, o.ret, fee);
    if (lg == minus_infinity) return minus_infinity;
    sum += o.prob * lg;
  }
  return sum;
}

namespace detail {

inline double standard_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive Gauss-Kronrod (7/15) over consecutive breakpoints: the
/// segment with the largest error estimate is bisected until the summed error
/// drops below max(abs_tol, rel_tol * L1) or the segment budget is spent.
template <class F>
QuadratureResult integrate_adaptive(const F& fn, std::span<const double> breakpoints, double abs_tol, double rel_tol,
                                    std::size_t max_segments = 400) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Segment {
    double a, b, value, error, l1;
  };
  const auto evaluate = [&](double a, double b) {
    Segment s{a, b, 0.0, 0.0, 0.0};
    s.value = GK::integrate(fn, a, b, 0, 0.0, &s.error, &s.l1);
    return s;
  };
  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) segments.push_back(evaluate(breakpoints[i], breakpoints[i + 1]));
  const auto totals = [&] {
    QuadratureResult r;
    double l1 = 0.0;
    for (const auto& s : segments) {
      r.value += s.value;
      r.error += s.error;
      l1 += s.l1;
    }
    return std::pair{r, l1};
  };
  auto [result, l1] = totals();
  while (result.error > std::max(abs_tol, rel_tol * l1) && segments.size() < max_segments) {
    auto worst = std::max_element(segments.begin(), segments.end(),
                                  [](const Segment& x, const Segment& y) { return x.error < y.error; });
    const double mid = 0.5 * (worst->a + worst->b);
    const Segment right = evaluate(mid, worst->b);
    *worst = evaluate(worst->a, mid);
    segments.push_back(right);
    std::tie(result, l1) = totals();
  }
  return result;
}

}  // namespace detail

/// Quadrature tolerance on G (absolute).
inline constexpr double quadrature_tolerance = 1e-12;

/// G(f) for a lognormal asset rebalanced every step:
/// integral of rho(eta) ln[1 + f r - alpha f (1-f) |r| / (1 - alpha chi)], r = e^eta - 1,
/// over eta in m +/- 10 sqrt(D), split at eta = 0.
inline double growth_lognormal(const LognormalAsset& asset, double f, const FeeSchedule& fee) {
  validate(asset);
  validate_fraction(f);
  validate(fee);
  if (f == 0.0) return 0.0;
  const double scale = std::sqrt(asset.d);
  const auto integrand = [&](double z) {
    const double lg = log_wealth_factor(f, std::expm1(asset.m + scale * z), fee);
    return detail::standard_normal_pdf(z) * lg;
  };
  constexpr double half_width = 10.0;
  const double kink = -asset.m / scale;
  std::vector<double> breaks{-half_width};
  if (kink > -half_width && kink < half_width) breaks.push_back(kink);
  breaks.push_back(half_width);
  // The internal target sits near roundoff so that argmax searches see a
  // smooth objective; only the reported tolerance is checked.
  const auto q = detail::integrate_adaptive(integrand, breaks, 1e-16, 1e-14);
  const double value = q.value;
  if (!std::isfinite(value) || q.error > quadrature_tolerance) {
    throw numerical_error("lognormal growth quadrature did not converge");
  }
  return value;
}

/// Per-step growth of a lognormal asset rebalanced every `periods` steps. The
/// compound log-return over a window is Normal(T m, T D).
inline double growth_lognormal(const LognormalAsset& asset, double f, int periods, const FeeSchedule& fee) {
  detail::require(periods >= 1, "period must be at least 1");
  return growth_lognormal(LognormalAsset{asset.m * periods, asset.d * periods}, f, fee) / periods;
}

/// Per-step growth of a binary asset rebalanced every `periods` steps.
inline double growth_binary(const BinaryAsset& asset, double f, int periods, const FeeSchedule& fee) {
  validate(asset);
  validate_fraction(f);
  validate(fee);
  detail::require(periods >= 1, "period must be at least 1");
  if (f == 0.0) return 0.0;
  if (periods > max_exact_period) {
    const auto moments = log_return_moments(asset);
    return growth_lognormal(LognormalAsset{moments.mean, moments.variance}, f, periods, fee);
  }
  return window_log_growth(binary_compound_distribution(asset, periods), f, fee) / periods;
}

/// Per-step growth of a two-scale asset rebalanced every `periods` steps.
inline double growth_two_scale(const TwoScaleDistribution& dist, int periods, double f, const FeeSchedule& fee) {
  if (f == 0.0) return 0.0;
  double g = dist.weight * window_log_growth(dist.regular, f, fee);
  if (dist.extra_weight > 0.0) {
    const double extra = window_log_growth(dist.extra, f, fee);
    if (extra == minus_infinity) return minus_infinity;
    g += dist.extra_weight * extra;
  }
  return g / periods;
}

inline double growth_two_scale(const TwoScaleAsset& asset, double f, int periods, const FeeSchedule& fee) {
  validate_fraction(f);
  validate(fee);
  return growth_two_scale(two_scale_compound_distribution(asset, periods), periods, f, fee);
}

/// Stationary per-step growth of a binary asset when, after every step, eps of
/// the required transfer toward f is executed. The invested fraction is a
/// Markov chain; its distribution is evolved on a uniform grid (mass split
/// linearly between neighbouring nodes) until the growth stops changing.
inline double growth_partial_binary(const BinaryAsset& asset, double f, double eps, const FeeSchedule& fee,
                                    int nodes_per_sigma = 400) {
  validate(asset);
  validate(Strategy{f, 1, eps});
  validate(fee);
  detail::require(nodes_per_sigma >= 10, "grid needs at least 10 nodes per standard deviation");
  if (f == 0.0 || f == 1.0 || eps == 1.0) return growth_binary(asset, f, 1, fee);

  // Only post-rebalance fractions live on the grid. One step moves the fraction
  // by at most c; what survives the rebalance is (1 - eps) of that, so the
  // chain stays within (1 - eps) c / eps of f and spreads by about
  // (1 - eps) c / sqrt(eps (2 - eps)).
  const double c = asset.r1 * f * (1.0 - f) / (1.0 - f * asset.r1);
  const double sigma = (1.0 - eps) * c / std::sqrt(eps * (2.0 - eps));
  const double half = std::min(1.5 * (1.0 - eps) * c / eps, 15.0 * sigma);
  const double h = sigma / nodes_per_sigma;
  const double lo = std::max(0.0, f - half);
  const double hi = std::min(1.0, f + half);
  const int below = static_cast<int>(std::ceil((f - lo) / h));
  const int n = below + static_cast<int>(std::ceil((hi - f) / h)) + 1;
  const double start = f - below * h;

  struct Move {
    int node;
    double upper;  // share of mass sent to node + 1
    double log_gain;
  };
  const double prob[2] = {0.5 + asset.p1, 0.5 - asset.p1};
  const double ret[2] = {asset.r1, -asset.r1};
  std::vector<Move> moves(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = std::clamp(start + i * h, 0.0, 1.0);
    for (int k = 0; k < 2; ++k) {
      const double step = 1.0 + x * ret[k];
      if (!(step > 0.0)) return minus_infinity;
      const auto next = rebalance(PortfolioState{1.0, x * (1.0 + ret[k]) / step}, f, fee, eps);
      if (!(next.total > 0.0)) return minus_infinity;
      const double pos = std::clamp((next.invested / next.total - start) / h, 0.0, n - 1.0);
      const int node = std::min(static_cast<int>(pos), n - 2);
      moves[2 * i + k] = {node, pos - node, std::log(step) + std::log(next.total)};
    }
  }

  std::vector<double> mass(n, 0.0), next(n);
  mass[below] = 1.0;
  double g = 0.0;
  const int max_iterations = static_cast<int>(200.0 / eps) + 1000;
  for (int it = 0; it < max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mass[i] == 0.0) continue;
      for (int k = 0; k < 2; ++k) {
        const auto& m = moves[2 * i + k];
        const double q = mass[i] * prob[k];
        acc += q * m.log_gain;
        next[m.node] += q * (1.0 - m.upper);
        next[m.node + 1] += q * m.upper;
      }
    }
    mass.swap(next);
    // The chain contracts by about (1 - eps) per step, so the remaining error
    // is roughly the last change divided by eps.
    const bool settled = it > 10 && std::fabs(acc - g) < 1e-16 * eps;
    g = acc;
    if (settled) return g;
  }
  throw numerical_error("partial rebalancing chain did not settle");
}

/// Growth objective f -> G for a fixed model, period, and fee. Distributions are
/// built once so repeated evaluation during a search is cheap.
using GrowthFunction = std::function<double(double)>;

inline GrowthFunction binary_growth_fn(const BinaryAsset& asset, int periods, const FeeSchedule& fee) {
  validate(fee);
  if (periods > max_exact_period) {
    return [=](double f) { return growth_binary(asset, f, periods, fee); };
  }
  auto dist = std::make_shared<const OutcomeDistribution>(binary_compound_distribution(asset, periods));
  return [dist, periods, fee](double f) {
    return f == 0.0 ? 0.0 : window_log_growth(*dist, f, fee) / periods;
  };
}

inline GrowthFunction two_scale_growth_fn(const TwoScaleAsset& asset, int periods, const FeeSchedule& fee) {
  validate(fee);
  auto dist = std::make_shared<const TwoScaleDistribution>(two_scale_compound_distribution(asset, periods));
  return [dist, periods, fee](double f) { return growth_two_scale(*dist, periods, f, fee); };
}

inline GrowthFunction lognormal_growth_fn(const LognormalAsset& asset, int periods, const FeeSchedule& fee) {
  validate(asset);
  validate(fee);
  detail::require(periods >= 1, "period must be at least 1");
  return [=](double f) { return growth_lognormal(asset, f, periods, fee); };
}

}  // namespace kelly
