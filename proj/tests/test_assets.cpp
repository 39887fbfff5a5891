#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "kelly/assets.hpp"
#include "kelly/stats.hpp"

using namespace kelly;

namespace {

// Outcome probabilities by number of up-moves, from all 2^T paths.
std::vector<double> enumerate_binary(const BinaryAsset& a, int periods) {
  std::vector<double> by_wins(periods + 1, 0.0);
  for (unsigned mask = 0; mask < (1u << periods); ++mask) {
    double p = 1.0;
    int wins = 0;
    for (int t = 0; t < periods; ++t) {
      const bool up = (mask >> t) & 1u;
      p *= up ? 0.5 + a.p1 : 0.5 - a.p1;
      wins += up;
    }
    by_wins[wins] += p;
  }
  return by_wins;
}

double enumerate_return(const BinaryAsset& a, int wins, int periods) {
  double w = 1.0;
  for (int t = 0; t < periods; ++t) w *= t < wins ? 1.0 + a.r1 : 1.0 - a.r1;
  return w - 1.0;
}

}  // namespace

TEST(BinaryDistribution, SymmetricTwoSteps) {
  const auto d = binary_compound_distribution({0.1, 0.0}, 2);
  ASSERT_EQ(d.entries.size(), 3u);
  EXPECT_NEAR(d.entries[0].prob, 0.25, 1e-15);
  EXPECT_NEAR(d.entries[1].prob, 0.5, 1e-15);
  EXPECT_NEAR(d.entries[2].prob, 0.25, 1e-15);
}

TEST(BinaryDistribution, SingleStep) {
  const auto d = binary_compound_distribution({0.1, 0.05}, 1);
  ASSERT_EQ(d.entries.size(), 2u);
  EXPECT_NEAR(d.entries[0].ret, -0.1, 1e-15);
  EXPECT_NEAR(d.entries[0].prob, 0.45, 1e-15);
  EXPECT_NEAR(d.entries[1].ret, 0.1, 1e-15);
  EXPECT_NEAR(d.entries[1].prob, 0.55, 1e-15);
}

TEST(BinaryDistribution, ThreeStepsAllWins) {
  const BinaryAsset a{0.1, 0.05};
  const auto d = binary_compound_distribution(a, 3);
  EXPECT_NEAR(d.entries[3].prob, 0.166375, 1e-14);
  EXPECT_NEAR(d.entries[3].ret, 0.331, 1e-14);
  EXPECT_NEAR(enumerate_binary(a, 3)[3], 0.166375, 1e-15);
}

TEST(BinaryDistribution, MatchesPathEnumeration) {
  for (const BinaryAsset a : {BinaryAsset{0.1, 0.05}, BinaryAsset{0.01, 0.001}, BinaryAsset{1.0, -0.3}, BinaryAsset{0.5, 0.5}}) {
    for (int t = 1; t <= 12; ++t) {
      const auto d = binary_compound_distribution(a, t);
      const auto oracle = enumerate_binary(a, t);
      ASSERT_EQ(d.entries.size(), oracle.size());
      for (int w = 0; w <= t; ++w) {
        EXPECT_NEAR(d.entries[w].prob, oracle[w], 1e-12) << "T=" << t << " w=" << w;
        EXPECT_NEAR(d.entries[w].ret, enumerate_return(a, w, t), 1e-12 * (1.0 + std::fabs(d.entries[w].ret)));
      }
    }
  }
}

TEST(BinaryDistribution, NormalizedForLongWindows) {
  for (int t : {1, 7, 100, 1000, 10000}) {
    const auto d = binary_compound_distribution({0.01, 0.001}, t);
    EXPECT_NEAR(d.total_probability(), 1.0, 1e-12) << t;
    for (const auto& o : d.entries) {
      EXPECT_GE(o.ret, -1.0);
      EXPECT_TRUE(std::isfinite(o.log_growth));
    }
  }
}

TEST(BinaryDistribution, DeepLossesKeepExactLog) {
  // 0.85^5000 underflows, so the return rounds to -1 but the log does not.
  const BinaryAsset a{0.15, 0.0};
  const auto d = binary_compound_distribution(a, 5000);
  EXPECT_EQ(d.entries.front().ret, -1.0);
  EXPECT_NEAR(d.entries.front().log_growth, 5000.0 * std::log(0.85), 1e-9);
  const auto ruin = binary_compound_distribution({1.0, 0.0}, 3);
  EXPECT_EQ(ruin.entries.front().log_growth, -INFINITY);
}

TEST(BinaryDistribution, Rejects) {
  EXPECT_THROW(binary_compound_distribution({0.1, 0.0}, 0), parameter_error);
  EXPECT_THROW(binary_compound_distribution({1.5, 0.0}, 1), parameter_error);
  EXPECT_THROW(binary_compound_distribution({0.1, -0.5}, 1), parameter_error);
}

TEST(TwoScaleDistribution, Weights) {
  TwoScaleAsset a{{0.05, -0.01}, 0.5, 0.05, 10};
  auto d = two_scale_compound_distribution(a, 10);
  EXPECT_EQ(d.weight, 1.0);
  EXPECT_EQ(d.extra_weight, 0.0);
  EXPECT_NEAR(d.regular.total_probability(), 1.0, 1e-12);
  EXPECT_EQ(d.regular.entries.size(), 11u * 2u);
  d = two_scale_compound_distribution(a, 13);
  EXPECT_NEAR(d.weight, 0.7, 1e-15);
  EXPECT_NEAR(d.extra_weight, 0.3, 1e-15);
}

// Enumerates every phase of the long-scale clock and every short/long path.
TEST(TwoScaleDistribution, MatchesPathEnumeration) {
  for (int t2 = 2; t2 <= 6; ++t2) {
    const TwoScaleAsset a{{0.05, -0.01}, 0.5, 0.05, t2};
    for (int t = 1; t <= 12; ++t) {
      std::map<std::tuple<int, int, int>, double> prob;  // (long events, w1, w2)
      std::map<std::tuple<int, int, int>, double> ret;
      for (int phase = 0; phase < t2; ++phase) {
        int n_long = 0;
        for (int k = phase + 1; k <= phase + t; ++k) n_long += k % t2 == 0;
        for (unsigned s = 0; s < (1u << t); ++s) {
          for (unsigned l = 0; l < (1u << n_long); ++l) {
            double p = 1.0 / t2;
            double growth = 1.0;
            int w1 = 0, w2 = 0;
            for (int i = 0; i < t; ++i) {
              const bool up = (s >> i) & 1u;
              p *= up ? 0.5 + a.base.p1 : 0.5 - a.base.p1;
              growth *= up ? 1.0 + a.base.r1 : 1.0 - a.base.r1;
              w1 += up;
            }
            for (int j = 0; j < n_long; ++j) {
              const bool up = (l >> j) & 1u;
              p *= up ? 0.5 + a.p2 : 0.5 - a.p2;
              growth *= up ? 1.0 + a.r2 : 1.0 - a.r2;
              w2 += up;
            }
            const auto key = std::make_tuple(n_long, w1, w2);
            prob[key] += p;
            ret[key] = growth - 1.0;
          }
        }
      }
      const auto d = two_scale_compound_distribution(a, t);
      double mass = 0.0;
      const auto check = [&](const OutcomeDistribution& dist, int n_long, double weight) {
        for (int w1 = 0; w1 <= t; ++w1) {
          for (int w2 = 0; w2 <= n_long; ++w2) {
            const auto& o = dist.entries[static_cast<std::size_t>(w1 * (n_long + 1) + w2)];
            const auto key = std::make_tuple(n_long, w1, w2);
            EXPECT_NEAR(weight * o.prob, prob[key], 1e-12) << "T2=" << t2 << " T=" << t;
            EXPECT_NEAR(o.ret, ret[key], 1e-12);
            mass += weight * o.prob;
          }
        }
      };
      check(d.regular, d.long_events, d.weight);
      if (d.extra_weight > 0.0) check(d.extra, d.long_events + 1, d.extra_weight);
      EXPECT_NEAR(mass, 1.0, 1e-12);
      EXPECT_EQ(prob.size(), static_cast<std::size_t>((t + 1) * (d.long_events + 1) +
                                                      (d.extra_weight > 0.0 ? (t + 1) * (d.long_events + 2) : 0)));
    }
  }
}

TEST(Sampling, BinarySupport) {
  Stream rng(42);
  const auto path = sample_path(BinaryAsset{0.1, 0.02}, 10000, rng);
  for (double r : path) EXPECT_TRUE(r == 0.1 || r == -0.1);
}

TEST(Sampling, LognormalMean) {
  constexpr int n = 1'000'000;
  Stream rng(7);
  const auto path = sample_path(LognormalAsset{0.0, 1e-4}, n, rng);
  std::vector<double> eta(path.size());
  std::transform(path.begin(), path.end(), eta.begin(), [](double r) { return std::log1p(r); });
  const auto s = summarize(eta);
  EXPECT_LT(std::fabs(s.mean), 4.0 * s.standard_error);
  EXPECT_NEAR(s.standard_error, std::sqrt(1e-4 / n), 0.01 * std::sqrt(1e-4 / n));
}

TEST(Sampling, StudentMedian) {
  constexpr int n = 1'000'000;
  const double sigma = 0.01;
  Stream rng(11);
  auto path = sample_path(StudentAsset{sigma, 0.0}, n, rng);
  std::vector<double> eta(path.size());
  std::transform(path.begin(), path.end(), eta.begin(), [](double r) { return std::log1p(r); });
  std::nth_element(eta.begin(), eta.begin() + n / 2, eta.end());
  const double median = eta[n / 2];
  // density of sigma * t2 at zero is 1 / (2 sqrt 2 sigma)
  const double density = 1.0 / (2.0 * std::sqrt(2.0) * sigma);
  const double median_se = 1.0 / (2.0 * density * std::sqrt(static_cast<double>(n)));
  EXPECT_LT(std::fabs(median), 4.0 * median_se);
}

TEST(Sampling, StudentQuartiles) {
  // t2 quartiles are +/- 1/sqrt(1.5) = 0.8165
  constexpr int n = 400'000;
  Stream rng(5);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.student_t2();
  std::sort(x.begin(), x.end());
  EXPECT_NEAR(x[3 * n / 4], std::sqrt(2.0 / 3.0), 0.01);
  EXPECT_NEAR(x[n / 4], -std::sqrt(2.0 / 3.0), 0.01);
}

TEST(Sampling, Reproducible) {
  for (const AssetModel& m : {AssetModel{BinaryAsset{0.1, 0.0}}, AssetModel{LognormalAsset{0.0, 1e-2}},
                              AssetModel{StudentAsset{}}, AssetModel{GarchAsset{}},
                              AssetModel{TwoScaleAsset{{0.05, -0.01}, 0.5, 0.05, 10}}}) {
    Stream a = Stream::for_realization(99, 3);
    Stream b = Stream::for_realization(99, 3);
    EXPECT_EQ(sample_path(m, 5000, a), sample_path(m, 5000, b));
    EXPECT_TRUE(a == b);
  }
  Stream c = Stream::for_realization(99, 4);
  Stream d = Stream::for_realization(99, 3);
  EXPECT_NE(sample_path(LognormalAsset{0.0, 1e-2}, 100, c), sample_path(LognormalAsset{0.0, 1e-2}, 100, d));
}

TEST(TwoScaleSampling, LongReturnEveryT2Steps) {
  const TwoScaleAsset a{{0.05, -0.01}, 0.5, 0.05, 4};
  Stream rng(3);
  const auto path = sample_path(a, 400, rng);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const bool long_step = (i + 1) % 4 == 0;
    const double r = path[i];
    if (long_step) {
      EXPECT_TRUE(std::fabs(std::fabs(r) - 0.05) > 0.1);
    } else {
      EXPECT_NEAR(std::fabs(r), 0.05, 1e-15);
    }
  }
}

TEST(Garch, ConstantVarianceWhenNoMemory) {
  const GarchAsset g{2e-4, 0.0, 0.0, 0.0};
  Stream rng(1);
  GarchState s{0.3, 5.0};
  for (int i = 0; i < 100; ++i) {
    s = garch_step(g, s, rng).second;
    EXPECT_EQ(s.prev_var, 2e-4);
  }
}

TEST(Garch, RecursionArithmetic) {
  const GarchAsset g{1e-5, 0.2, 0.7, 0.0};
  Stream rng(1);
  Stream copy = rng;
  const auto [r, s] = garch_step(g, GarchState{0.01, 1e-4}, rng);
  EXPECT_NEAR(s.prev_var, 1.0e-4, 1e-18);
  EXPECT_EQ(s.prev_eps, std::sqrt(s.prev_var) * copy.normal());
  EXPECT_EQ(r, std::expm1(s.prev_eps));
}

TEST(Garch, LongRunVariance) {
  const GarchAsset g{1e-5, 0.2, 0.7, 0.0};
  EXPECT_NEAR(g.unconditional_variance(), 1e-4, 1e-18);
  Stream rng(2024);
  GarchState s{0.0, g.unconditional_variance()};
  std::vector<double> var(1'000'000);
  for (auto& v : var) {
    s = garch_step(g, s, rng).second;
    v = s.prev_var;
  }
  EXPECT_NEAR(pairwise_sum(var) / var.size(), 1e-4, 3e-6);
}

TEST(Garch, RejectsBadState) {
  Stream rng(1);
  EXPECT_THROW(garch_step(GarchAsset{}, GarchState{0.0, 0.0}, rng), numerical_error);
  EXPECT_THROW(garch_step(GarchAsset{}, GarchState{NAN, 1e-4}, rng), numerical_error);
  EXPECT_THROW(validate(GarchAsset{1e-5, 0.5, 0.5, 0.0}), parameter_error);
}

TEST(Assets, Validation) {
  EXPECT_THROW(validate(TwoScaleAsset{{0.1, 0.0}, 0.5, 0.05, 1}), parameter_error);
  EXPECT_THROW(validate(LognormalAsset{0.0, 0.0}), parameter_error);
  EXPECT_THROW(validate(StudentAsset{0.0, 0.0}), parameter_error);
  EXPECT_NO_THROW(validate(BinaryAsset{1.0, 0.5}));
}
