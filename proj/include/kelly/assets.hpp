#pragma once

// Return models: parameter records, exact compound outcome distributions, and
// seeded per-step samplers.

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <variant>
#include <vector>

#include "kelly/errors.hpp"
#include "kelly/random.hpp"

namespace kelly {

/// Symmetric binary asset: each step returns +r1 with probability 1/2 + p1
/// and -r1 with probability 1/2 - p1.
struct BinaryAsset {
  double r1 = 0.0;
  double p1 = 0.0;
};

/// Binary asset with an additional +/- r2 return every `t2` steps.
struct TwoScaleAsset {
  BinaryAsset base;
  double r2 = 0.0;
  double p2 = 0.0;
  int t2 = 2;
};

/// Log-return eta ~ Normal(m, d) per step; r = exp(eta) - 1.
struct LognormalAsset {
  double m = 0.0;
  double d = 0.0;
};

/// Log-return drift + sigma * chi with chi ~ Student-t(2).
struct StudentAsset {
  static constexpr int dof = 2;
  double sigma = 0.01;
  double drift = 0.0;
};

/// GARCH(1,1) log-return innovations: var_t = a0 + a1 eps_{t-1}^2 + b var_{t-1}.
struct GarchAsset {
  static constexpr int burn_in = 1000;
  double a0 = 1e-5;
  double a1 = 0.2;
  double b = 0.7;
  double drift = 0.0;

  double unconditional_variance() const { return a0 / (1.0 - a1 - b); }
};

using AssetModel = std::variant<BinaryAsset, TwoScaleAsset, LognormalAsset, StudentAsset, GarchAsset>;

inline void validate(const BinaryAsset& a) {
  detail::require(a.r1 > 0.0 && a.r1 <= 1.0, "r1 must lie in (0, 1]");
  detail::require(a.p1 > -0.5 && a.p1 <= 0.5, "p1 must lie in (-1/2, 1/2]");
}

inline void validate(const TwoScaleAsset& a) {
  validate(a.base);
  detail::require(a.r2 > 0.0 && a.r2 <= 1.0, "r2 must lie in (0, 1]");
  detail::require(a.p2 > -0.5 && a.p2 <= 0.5, "p2 must lie in (-1/2, 1/2]");
  detail::require(a.t2 >= 2, "t2 must be at least 2");
}

inline void validate(const LognormalAsset& a) {
  detail::require(std::isfinite(a.m), "m must be finite");
  detail::require(a.d > 0.0 && std::isfinite(a.d), "d must be positive");
}

inline void validate(const StudentAsset& a) {
  detail::require(a.sigma > 0.0 && std::isfinite(a.sigma), "sigma must be positive");
  detail::require(std::isfinite(a.drift), "drift must be finite");
}

inline void validate(const GarchAsset& a) {
  detail::require(a.a0 > 0.0, "a0 must be positive");
  detail::require(a.a1 >= 0.0 && a.b >= 0.0, "a1 and b must be non-negative");
  detail::require(a.a1 + a.b < 1.0, "a1 + b must be below 1 for stationarity");
  detail::require(std::isfinite(a.drift), "drift must be finite");
}

inline void validate(const AssetModel& model) {
  std::visit([](const auto& a) { validate(a); }, model);
}

/// Mean and variance of the per-step log-return ln(1 +/- r1).
struct LogMoments {
  double mean = 0.0;
  double variance = 0.0;
};

inline LogMoments log_return_moments(const BinaryAsset& a) {
  validate(a);
  const double up = std::log1p(a.r1);
  const double down = std::log1p(-a.r1);
  const double pu = 0.5 + a.p1;
  const double pd = 0.5 - a.p1;
  const double mean = pu * up + pd * down;
  const double spread = up - down;
  return {mean, pu * pd * spread * spread};
}

struct Outcome {
  double ret = 0.0;   ///< compound return over the window, >= -1
  double prob = 0.0;
  /// ln(1 + ret), kept separately: deep losses over long windows round ret to
  /// -1 while the log stays finite. -inf only for a true total loss.
  double log_growth = 0.0;

  static Outcome from_log(double log_growth, double prob) { return {std::expm1(log_growth), prob, log_growth}; }
};

struct OutcomeDistribution {
  std::vector<Outcome> entries;

  double total_probability() const {
    return std::accumulate(entries.begin(), entries.end(), 0.0,
                           [](double acc, const Outcome& o) { return acc + o.prob; });
  }
};

namespace detail {

// k * log(x) with the convention 0 * log(0) = 0.
inline double count_log(int k, double log_x) { return k == 0 ? 0.0 : k * log_x; }

/// log of C(n, k) p^k q^(n-k), evaluated in log-space.
inline double log_binomial_pmf(int n, int k, double log_p, double log_q) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         count_log(k, log_p) + count_log(n - k, log_q);
}

inline std::vector<double> binomial_weights(int n, double p_win) {
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  const double log_p = std::log(p_win);
  const double log_q = std::log1p(-p_win);
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    w[k] = std::exp(log_binomial_pmf(n, k, log_p, log_q));
    sum += w[k];
  }
  for (auto& x : w) x /= sum;
  return w;
}

/// ln of (1+r)^wins (1-r)^losses.
inline double compound_log_growth(int wins, int losses, double r) {
  return count_log(wins, std::log1p(r)) + count_log(losses, std::log1p(-r));
}

}  // namespace detail

/// Distribution of the compound return over `periods` steps of a binary asset.
/// Entry w holds r_w = (1+r1)^w (1-r1)^(T-w) - 1 with its binomial probability.
inline OutcomeDistribution binary_compound_distribution(const BinaryAsset& asset, int periods) {
  validate(asset);
  detail::require(periods >= 1, "period must be at least 1");
  const auto weights = detail::binomial_weights(periods, 0.5 + asset.p1);
  OutcomeDistribution dist;
  dist.entries.reserve(weights.size());
  for (int w = 0; w <= periods; ++w) {
    dist.entries.push_back(Outcome::from_log(detail::compound_log_growth(w, periods - w, asset.r1), weights[w]));
  }
  return dist;
}

/// Mixture of two compound distributions for a two-scale asset observed over a
/// window of `periods` steps at a uniformly random phase: the window contains
/// either `long_events` or `long_events + 1` long-scale returns.
struct TwoScaleDistribution {
  int long_events = 0;
  double weight = 1.0;             ///< odds of `long_events` long returns
  OutcomeDistribution regular;
  double extra_weight = 0.0;       ///< odds of `long_events + 1` long returns
  OutcomeDistribution extra;
};

namespace detail {

inline OutcomeDistribution two_scale_window(const TwoScaleAsset& a, int periods, int long_events) {
  const auto w1 = binomial_weights(periods, 0.5 + a.base.p1);
  const auto w2 = binomial_weights(long_events, 0.5 + a.p2);
  const double up1 = std::log1p(a.base.r1), down1 = std::log1p(-a.base.r1);
  const double up2 = std::log1p(a.r2), down2 = std::log1p(-a.r2);
  OutcomeDistribution dist;
  dist.entries.reserve(w1.size() * w2.size());
  for (int i = 0; i <= periods; ++i) {
    for (int j = 0; j <= long_events; ++j) {
      const double log_growth = count_log(i, up1) + count_log(periods - i, down1) +
                                count_log(j, up2) + count_log(long_events - j, down2);
      dist.entries.push_back(Outcome::from_log(log_growth, w1[i] * w2[j]));
    }
  }
  return dist;
}

}  // namespace detail

inline TwoScaleDistribution two_scale_compound_distribution(const TwoScaleAsset& asset, int periods) {
  validate(asset);
  detail::require(periods >= 1, "period must be at least 1");
  TwoScaleDistribution out;
  out.long_events = periods / asset.t2;
  const int remainder = periods % asset.t2;
  out.extra_weight = static_cast<double>(remainder) / asset.t2;
  out.weight = 1.0 - out.extra_weight;
  out.regular = detail::two_scale_window(asset, periods, out.long_events);
  if (remainder != 0) out.extra = detail::two_scale_window(asset, periods, out.long_events + 1);
  return out;
}

struct GarchState {
  double prev_eps = 0.0;
  double prev_var = 0.0;
};

/// One GARCH(1,1) step. Returns the arithmetic return exp(drift + eps) - 1 and
/// the updated state.
inline std::pair<double, GarchState> garch_step(const GarchAsset& asset, GarchState state, Stream& rng) {
  if (!std::isfinite(state.prev_eps) || !std::isfinite(state.prev_var) || state.prev_var <= 0.0) {
    throw numerical_error("GARCH state must be finite with positive variance");
  }
  const double var = asset.a0 + asset.a1 * state.prev_eps * state.prev_eps + asset.b * state.prev_var;
  const double eps = std::sqrt(var) * rng.normal();
  return {std::expm1(asset.drift + eps), GarchState{eps, var}};
}

/// Stateful per-step return generator for any asset model. Owns only model
/// state (GARCH variance, two-scale clock); randomness comes from the caller's stream.
class ReturnSampler {
public:
  ReturnSampler(const AssetModel& model, Stream& rng) : model_(model) {
    validate(model_);
    if (const auto* g = std::get_if<GarchAsset>(&model_)) {
      garch_ = GarchState{0.0, g->unconditional_variance()};
      for (int i = 0; i < GarchAsset::burn_in; ++i) garch_ = garch_step(*g, garch_, rng).second;
    }
  }

  double next(Stream& rng) {
    return std::visit([&](const auto& a) { return draw(a, rng); }, model_);
  }

private:
  double draw(const BinaryAsset& a, Stream& rng) const {
    return rng.uniform_open() < 0.5 + a.p1 ? a.r1 : -a.r1;
  }

  double draw(const TwoScaleAsset& a, Stream& rng) {
    ++clock_;
    const double short_ret = draw(a.base, rng);
    if (clock_ % a.t2 != 0) return short_ret;
    const double long_ret = rng.uniform_open() < 0.5 + a.p2 ? a.r2 : -a.r2;
    return (1.0 + short_ret) * (1.0 + long_ret) - 1.0;
  }

  double draw(const LognormalAsset& a, Stream& rng) const {
    return std::expm1(a.m + std::sqrt(a.d) * rng.normal());
  }

  double draw(const StudentAsset& a, Stream& rng) const {
    return std::expm1(a.drift + a.sigma * rng.student_t2());
  }

  double draw(const GarchAsset& a, Stream& rng) {
    auto [ret, state] = garch_step(a, garch_, rng);
    garch_ = state;
    return ret;
  }

  AssetModel model_;
  GarchState garch_{};
  long long clock_ = 0;
};

/// `periods` consecutive per-step returns of `model`; a pure function of the stream state.
inline std::vector<double> sample_path(const AssetModel& model, int periods, Stream& rng) {
  detail::require(periods >= 1, "path length must be at least 1");
  ReturnSampler sampler(model, rng);
  std::vector<double> path(static_cast<std::size_t>(periods));
  for (auto& r : path) r = sampler.next(rng);
  return path;
}

}  // namespace kelly
