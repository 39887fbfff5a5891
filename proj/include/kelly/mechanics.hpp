#pragma once

// Fee-aware portfolio arithmetic.
//
// Transfer convention: a transfer of magnitude |X| leaves the source side in
// full and the destination receives |X| (1 - alpha). X > 0 moves wealth from
// the asset to cash, X < 0 from cash to the asset.

#include <cmath>
#include <limits>

#include "kelly/errors.hpp"

namespace kelly {

struct FeeSchedule {
  double alpha = 0.0;
};

struct PortfolioState {
  double total = 1.0;     ///< wealth W
  double invested = 0.0;  ///< amount S held in the risky asset

  double fraction() const { return invested / total; }
};

struct Strategy {
  double f = 0.0;    ///< target investment fraction
  int period = 1;    ///< rebalancing period T
  double eps = 1.0;  ///< share of the required transfer actually executed
};

inline void validate(const FeeSchedule& fee) {
  detail::require(fee.alpha >= 0.0 && fee.alpha < 1.0, "alpha must lie in [0, 1)");
}

inline void validate_fraction(double f) {
  detail::require(f >= 0.0 && f <= 1.0, "investment fraction must lie in [0, 1]");
}

inline void validate(const Strategy& s) {
  validate_fraction(s.f);
  detail::require(s.period >= 1, "rebalancing period must be at least 1");
  detail::require(s.eps > 0.0 && s.eps <= 1.0, "eps must lie in (0, 1]");
}

inline void validate(const PortfolioState& s) {
  detail::require(s.total > 0.0 && std::isfinite(s.total), "portfolio total must be positive");
  detail::require(s.invested >= 0.0 && s.invested <= s.total * (1.0 + 1e-12),
                  "invested amount must lie in [0, total]");
}

/// Signed transfer that brings `state` to fraction f after fees.
///
/// Solves f (W - alpha |X|) = S' where S' is the invested amount after the
/// transfer: S - X when selling, S + |X| (1 - alpha) when buying. Both cases
/// reduce to X = (S - f W) / (1 - alpha chi) with chi = f when selling and
/// 1 - f when buying.
inline double required_transfer(const PortfolioState& state, double f, const FeeSchedule& fee) {
  validate_fraction(f);
  validate(fee);
  const double excess = state.invested - f * state.total;
  if (excess == 0.0) return 0.0;
  const double chi = excess > 0.0 ? f : 1.0 - f;
  const double transfer = excess / (1.0 - fee.alpha * chi);
  if (!(state.total - fee.alpha * std::fabs(transfer) > 0.0)) {
    throw numerical_error("no transfer reaches the target fraction with positive wealth");
  }
  return transfer;
}

/// Executes eps * required_transfer. A non-positive total in the result marks ruin.
inline PortfolioState rebalance(const PortfolioState& state, double f, const FeeSchedule& fee, double eps = 1.0) {
  detail::require(eps > 0.0 && eps <= 1.0, "eps must lie in (0, 1]");
  const double moved = eps * required_transfer(state, f, fee);
  const double fee_paid = fee.alpha * std::fabs(moved);
  PortfolioState next{state.total - fee_paid, state.invested};
  if (moved > 0.0) {
    next.invested -= moved;
  } else {
    next.invested -= moved * (1.0 - fee.alpha);
  }
  return next;
}

/// Net wealth multiplier of one balanced-to-balanced cycle whose compound asset
/// return is r: 1 + f r - alpha f (1-f) |r| / (1 - alpha chi(f, r)).
inline double wealth_factor_full_rebalance(double f, double r, const FeeSchedule& fee) {
  const double chi = r > 0.0 ? f : 1.0 - f;
  return 1.0 + f * r - fee.alpha * f * (1.0 - f) * std::fabs(r) / (1.0 - fee.alpha * chi);
}

/// ln of wealth_factor_full_rebalance, -inf on ruin.
inline double log_wealth_factor(double f, double r, const FeeSchedule& fee) {
  const double chi = r > 0.0 ? f : 1.0 - f;
  const double x = f * r - fee.alpha * f * (1.0 - f) * std::fabs(r) / (1.0 - fee.alpha * chi);
  if (!(x > -1.0)) return -std::numeric_limits<double>::infinity();
  return std::log1p(x);
}

}  // namespace kelly
