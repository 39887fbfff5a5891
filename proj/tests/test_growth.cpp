#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kelly/growth.hpp"
#include "kelly/sim.hpp"
#include "kelly/random.hpp"
#include "kelly/stats.hpp"

using namespace kelly;

namespace {

const double g_kelly = 0.55 * std::log(1.1) + 0.45 * std::log(0.9);

std::vector<OutcomeDistribution> sample_distributions() {
  std::vector<OutcomeDistribution> out;
  for (int t : {1, 2, 5, 30}) {
    out.push_back(binary_compound_distribution({0.1, 0.02}, t));
    out.push_back(binary_compound_distribution({0.5, -0.1}, t));
  }
  out.push_back(two_scale_compound_distribution({{0.05, -0.01}, 0.5, 0.05, 10}, 13).extra);
  return out;
}

}  // namespace

TEST(GrowthBinary, ZeroFraction) {
  for (int t : {1, 3, 50}) {
    for (double a : {0.0, 1e-3}) EXPECT_EQ(growth_binary({0.1, 0.02}, 0.0, t, FeeSchedule{a}), 0.0);
  }
}

TEST(GrowthBinary, KellyExample) {
  const double g = growth_binary({1.0, 0.05}, 0.1, 1, FeeSchedule{0.0});
  EXPECT_NEAR(g, g_kelly, 1e-15);
  EXPECT_NEAR(g, 0.0050084, 1e-7);
}

TEST(GrowthBinary, RuinousFractionIsMinusInfinity) {
  EXPECT_EQ(growth_binary({1.0, 0.05}, 1.0, 1, FeeSchedule{0.0}), minus_infinity);
  EXPECT_TRUE(std::isfinite(growth_binary({1.0, 0.05}, 0.99, 1, FeeSchedule{0.0})));
}

TEST(GrowthBinary, IntermittentWithoutFeesAtBoundaries) {
  const BinaryAsset a{0.1, 0.02};
  for (int t : {2, 7, 40}) {
    EXPECT_NEAR(growth_binary(a, 1.0, t, FeeSchedule{0.0}), growth_binary(a, 1.0, 1, FeeSchedule{0.0}), 1e-14);
    EXPECT_NEAR(growth_binary(a, 0.5, t, FeeSchedule{0.0}), growth_binary(a, 0.5, 1, FeeSchedule{0.0}), 2e-3);
  }
}

TEST(GrowthBinary, FullyInvestedLongWindowIsFinite) {
  const BinaryAsset a{0.15, 0.02};
  const auto m = log_return_moments(a);
  EXPECT_NEAR(growth_binary(a, 1.0, 5000, FeeSchedule{1e-3}), m.mean, 1e-12);
}

TEST(GrowthBinary, LongWindowSurrogateIsContinuous) {
  const BinaryAsset a{0.01, 0.001};
  const FeeSchedule fee{1e-5};
  const double exact = growth_binary(a, 0.2, max_exact_period, fee);
  const double surrogate = growth_binary(a, 0.2, max_exact_period + 1, fee);
  EXPECT_NEAR(surrogate, exact, 2e-3 * std::fabs(exact));
}

TEST(LongTermReturn, Examples) {
  EXPECT_EQ(long_term_return(0.0), 0.0);
  EXPECT_NEAR(long_term_return(std::log(2.0)), 1.0, 1e-15);
  EXPECT_NEAR(long_term_return(0.0050084), 0.0050210, 1e-7);
  const auto e = make_estimate(g_kelly);
  EXPECT_NEAR(e.R, std::exp(e.G) - 1.0, 1e-15);
  EXPECT_FALSE(e.stderr_.has_value());
}

TEST(GrowthTwoScale, ZeroFraction) {
  EXPECT_EQ(growth_two_scale(TwoScaleAsset{{0.05, -0.01}, 0.5, 0.05, 10}, 0.0, 7, FeeSchedule{1e-3}), 0.0);
}

TEST(GrowthTwoScale, ReducesToBinary) {
  const BinaryAsset base{0.05, 0.01};
  for (int t2 : {2, 5}) {
    const TwoScaleAsset a{base, 1e-12, 0.0, t2};
    for (int t : {1, 3, 10}) {
      for (double f : {0.1, 0.5, 0.9}) {
        for (double alpha : {0.0, 1e-3}) {
          EXPECT_NEAR(growth_two_scale(a, f, t, FeeSchedule{alpha}), growth_binary(base, f, t, FeeSchedule{alpha}), 1e-9);
        }
      }
    }
  }
}

TEST(GrowthTwoScale, ProfitableOnLongScale) {
  const TwoScaleAsset a{{0.05, -0.01}, 0.5, 0.05, 10};
  double best = minus_infinity;
  for (int i = 0; i <= 1000; ++i) best = std::max(best, growth_two_scale(a, i / 1000.0, 10, FeeSchedule{0.0}));
  EXPECT_GT(best, 0.0);
  // The short scale alone loses money at any positive fraction.
  EXPECT_LT(growth_binary(a.base, 0.1, 1, FeeSchedule{0.0}), 0.0);
}

TEST(GrowthLognormal, ZeroFraction) { EXPECT_EQ(growth_lognormal({0.0, 1e-2}, 0.0, FeeSchedule{1e-3}), 0.0); }

TEST(GrowthLognormal, MonteCarloOracle) {
  constexpr int n = 10'000'000;
  Stream rng(314159);
  std::vector<double> x(n);
  for (auto& v : x) v = std::log1p(0.5 * std::expm1(0.1 * rng.normal()));
  const auto s = summarize(x);
  const double g = growth_lognormal({0.0, 1e-2}, 0.5, FeeSchedule{0.0});
  EXPECT_LT(std::fabs(s.mean - g), 4.0 * s.standard_error) << s.mean << " vs " << g;
}

TEST(GrowthLognormal, MonteCarloOracleWithFee) {
  constexpr int n = 2'000'000;
  Stream rng(2718);
  const FeeSchedule fee{1e-2};
  std::vector<double> x(n);
  for (auto& v : x) v = log_wealth_factor(0.7, std::expm1(0.002 + 0.1 * rng.normal()), fee);
  const auto s = summarize(x);
  const double g = growth_lognormal({0.002, 1e-2}, 0.7, fee);
  EXPECT_LT(std::fabs(s.mean - g), 4.0 * s.standard_error);
}

TEST(GrowthLognormal, SmallVarianceExpansion) {
  // Without fees G(f) = f m + f (1 - f) D / 2 to leading order.
  const double m = 1e-5, d = 1e-4, f = 0.3;
  EXPECT_NEAR(growth_lognormal({m, d}, f, FeeSchedule{0.0}), f * m + 0.5 * f * (1.0 - f) * d, 1e-8);
}

TEST(GrowthLognormal, ArgmaxNearClosedForm) {
  const LognormalAsset a{0.004, 0.01};
  double best_f = 0.0, best = minus_infinity;
  for (int i = 0; i <= 1000; ++i) {
    const double g = growth_lognormal(a, i / 1000.0, FeeSchedule{0.0});
    if (g > best) {
      best = g;
      best_f = i / 1000.0;
    }
  }
  EXPECT_NEAR(best_f, 0.9, 0.01);
}

TEST(GrowthLognormal, PeriodScaling) {
  const LognormalAsset a{0.001, 0.01};
  EXPECT_NEAR(growth_lognormal(a, 0.4, 5, FeeSchedule{1e-3}),
              growth_lognormal(LognormalAsset{0.005, 0.05}, 0.4, FeeSchedule{1e-3}) / 5.0, 1e-15);
}

TEST(Property, BoundaryFeeIndependence) {
  for (double f : {0.0, 1.0}) {
    for (double a : {1e-5, 1e-3, 0.1}) {
      EXPECT_EQ(growth_binary({0.1, 0.02}, f, 3, FeeSchedule{a}), growth_binary({0.1, 0.02}, f, 3, FeeSchedule{0.0}));
      EXPECT_NEAR(growth_lognormal({0.001, 1e-2}, f, FeeSchedule{a}), growth_lognormal({0.001, 1e-2}, f, FeeSchedule{0.0}), 1e-14);
      const TwoScaleAsset ts{{0.05, -0.01}, 0.5, 0.05, 10};
      EXPECT_EQ(growth_two_scale(ts, f, 7, FeeSchedule{a}), growth_two_scale(ts, f, 7, FeeSchedule{0.0}));
    }
  }
}

TEST(Property, NonIncreasingInFee) {
  const std::vector<double> fees{0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1};
  for (const auto& dist : sample_distributions()) {
    for (int i = 1; i < 20; ++i) {
      const double f = i / 20.0;
      double prev = window_log_growth(dist, f, FeeSchedule{fees[0]});
      for (std::size_t k = 1; k < fees.size(); ++k) {
        const double g = window_log_growth(dist, f, FeeSchedule{fees[k]});
        EXPECT_LE(g, prev);
        prev = g;
      }
    }
  }
  for (int i = 1; i < 20; ++i) {
    double prev = growth_lognormal({0.001, 1e-2}, i / 20.0, FeeSchedule{0.0});
    for (double a : fees) {
      const double g = growth_lognormal({0.001, 1e-2}, i / 20.0, FeeSchedule{a});
      EXPECT_LE(g, prev + 1e-15);
      prev = g;
    }
  }
}

TEST(Property, FeeFreeConcavity) {
  constexpr int n = 200;
  const double h = 1.0 / n;
  for (const auto& dist : sample_distributions()) {
    std::vector<double> g(n + 1);
    for (int i = 0; i <= n; ++i) g[i] = window_log_growth(dist, i * h, FeeSchedule{0.0});
    for (int i = 1; i < n; ++i) {
      if (!std::isfinite(g[i + 1])) break;
      EXPECT_LE(g[i - 1] - 2.0 * g[i] + g[i + 1], 1e-15);
    }
  }
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = growth_lognormal({0.003, 1e-2}, i * h, FeeSchedule{0.0});
  for (int i = 1; i < n; ++i) EXPECT_LE(g[i - 1] - 2.0 * g[i] + g[i + 1], 1e-13);
}

TEST(Property, CltMomentsOfCompoundLogReturn) {
  for (const BinaryAsset a : {BinaryAsset{0.01, 0.001}, BinaryAsset{0.1, 0.02}, BinaryAsset{0.05, -0.01}}) {
    const int t = 200;
    const auto moments = log_return_moments(a);
    const auto dist = binary_compound_distribution(a, t);
    double mean = 0.0;
    for (const auto& o : dist.entries) mean += o.prob * std::log1p(o.ret);
    double var = 0.0;
    for (const auto& o : dist.entries) var += o.prob * (std::log1p(o.ret) - mean) * (std::log1p(o.ret) - mean);
    EXPECT_NEAR(mean, t * moments.mean, 0.01 * std::fabs(t * moments.mean));
    EXPECT_NEAR(var, t * moments.variance, 0.01 * t * moments.variance);
  }
}

TEST(Quadrature, ReportsNonConvergence) {
  // A single Kronrod panel per segment cannot resolve this spike.
  const auto spike = [](double x) { return 1.0 / (1e-6 + x * x); };
  const std::vector<double> breaks{-1.0, 1.0};
  const auto q = detail::integrate_adaptive(spike, breaks, 1e-16, 1e-14, 3);
  EXPECT_GT(q.error, quadrature_tolerance);
}

TEST(Growth, Validation) {
  EXPECT_THROW(growth_binary({0.1, 0.0}, 1.5, 1, FeeSchedule{}), parameter_error);
  EXPECT_THROW(growth_binary({0.1, 0.0}, 0.5, 0, FeeSchedule{}), parameter_error);
  EXPECT_THROW(growth_lognormal({0.0, -1.0}, 0.5, FeeSchedule{}), parameter_error);
}

TEST(GrowthPartial, FullStepIsStandardRebalancing) {
  const BinaryAsset a{0.1, 0.02};
  for (double f : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(growth_partial_binary(a, f, 1.0, FeeSchedule{1e-3}), growth_binary(a, f, 1, FeeSchedule{1e-3}));
  }
  EXPECT_EQ(growth_partial_binary(a, 1.0, 0.2, FeeSchedule{1e-3}), growth_binary(a, 1.0, 1, FeeSchedule{1e-3}));
}

TEST(GrowthPartial, NearlyFullStepIsContinuous) {
  const BinaryAsset a{0.1, 0.02};
  // Skipping a share 1 - eps of each transfer saves about (1 - eps) of the fees.
  const double full = growth_binary(a, 0.3, 1, FeeSchedule{1e-3});
  const double fee_per_step = full - growth_binary(a, 0.3, 1, FeeSchedule{0.0});
  EXPECT_NEAR(growth_partial_binary(a, 0.3, 1.0 - 1e-6, FeeSchedule{1e-3}), full, 1e-6 * std::fabs(fee_per_step) * 2.0);
}

TEST(GrowthPartial, GridRefinementConverges) {
  const BinaryAsset a{0.01, 0.001};
  for (double eps : {0.03, 0.2}) {
    const double coarse = growth_partial_binary(a, 0.2, eps, FeeSchedule{1e-5}, 400);
    const double fine = growth_partial_binary(a, 0.2, eps, FeeSchedule{1e-5}, 1600);
    EXPECT_NEAR(coarse, fine, 1e-12);
  }
}

TEST(GrowthPartial, MonteCarloOracle) {
  // Large fee and return so the partial-rebalancing effect dwarfs the noise.
  const BinaryAsset a{0.1, 0.02};
  const FeeSchedule fee{5e-3};
  const double eps = 0.1, f = 0.3;
  SimConfig c;
  c.steps = 100'000;
  c.realizations = 40;
  c.master_seed = 5;
  c.model = a;
  c.fee = fee;
  const auto partial = simulate_growth(c, Strategy{f, 1, eps});
  const double exact = growth_partial_binary(a, f, eps, fee);
  EXPECT_LT(std::fabs(partial.G - exact), 4.0 * *partial.stderr_);
  // Paired comparison against full rebalancing on the same paths.
  std::vector<double> diff;
  for (int i = 0; i < c.realizations; ++i) {
    const auto path = realization_path(c, i);
    diff.push_back(path_log_growth(path, Strategy{f, 1, eps}, fee) - path_log_growth(path, Strategy{f, 1, 1.0}, fee));
  }
  const auto d = summarize(diff);
  const double exact_gain = exact - growth_binary(a, f, 1, fee);
  EXPECT_GT(exact_gain, 0.0);
  EXPECT_LT(std::fabs(d.mean - exact_gain), 4.0 * d.standard_error);
}
