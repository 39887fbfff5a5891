#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kelly/errors.hpp"

namespace kelly {

/// Pairwise (cascade) summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct SampleSummary {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Mean and standard error of the mean. A -inf sample makes the mean -inf.
inline SampleSummary summarize(std::span<const double> xs) {
  detail::require(!xs.empty(), "cannot summarize an empty sample");
  const double n = static_cast<double>(xs.size());
  const double mean = pairwise_sum(xs) / n;
  if (!std::isfinite(mean) || xs.size() < 2) return {mean, xs.size() < 2 ? 0.0 : INFINITY};
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

/// Least-squares slope of ln(y) against ln(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(x[i] > 0.0 && y[i] > 0.0, "slope fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  detail::require(sxx > 0.0, "slope fit needs distinct x values");
  return sxy / sxx;
}

}  // namespace kelly
