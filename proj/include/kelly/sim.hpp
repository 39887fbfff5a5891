#pragma once

// Seeded Monte-Carlo estimation of long-run growth.
//
// Realization i draws its returns from Stream::for_realization(master_seed, i),
// so every estimate is a pure function of (config, strategy) and independent of
// the worker count. Sweeps evaluate all decision points on the same paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "kelly/assets.hpp"
#include "kelly/errors.hpp"
#include "kelly/growth.hpp"
#include "kelly/mechanics.hpp"
#include "kelly/parallel.hpp"
#include "kelly/random.hpp"
#include "kelly/stats.hpp"

namespace kelly {

struct SimScale {
  long long steps;
  int realizations;
};

inline constexpr SimScale full_scale{1'000'000, 1000};
inline constexpr SimScale reduced_scale{100'000, 100};

struct SimConfig {
  long long steps = full_scale.steps;
  int realizations = full_scale.realizations;
  std::uint64_t master_seed = 1;
  AssetModel model = BinaryAsset{0.1, 0.05};
  FeeSchedule fee{};
  unsigned threads = 0;  ///< 0 = machine parallelism

  SimConfig& scale(SimScale s) {
    steps = s.steps;
    realizations = s.realizations;
    return *this;
  }
};

inline void validate(const SimConfig& c) {
  detail::require(c.steps >= 1, "steps must be at least 1");
  detail::require(c.realizations >= 1, "realizations must be at least 1");
  detail::require(c.steps <= std::numeric_limits<int>::max(), "steps exceeds the supported path length");
  validate(c.model);
  validate(c.fee);
}

/// Returns of realization `index`.
inline std::vector<double> realization_path(const SimConfig& config, std::uint64_t index) {
  Stream rng = Stream::for_realization(config.master_seed, index);
  return sample_path(config.model, static_cast<int>(config.steps), rng);
}

/// Log-wealth growth per step along one path: returns move the invested
/// fraction, and every `period` steps eps of the required transfer is executed.
inline double path_log_growth(std::span<const double> path, const Strategy& strategy, const FeeSchedule& fee) {
  if (strategy.f == 0.0) return 0.0;
  double log_wealth = 0.0;
  double fraction = strategy.f;
  std::size_t until_rebalance = static_cast<std::size_t>(strategy.period);
  for (const double r : path) {
    const double change = fraction * r;
    if (!(change > -1.0)) return minus_infinity;
    log_wealth += std::log1p(change);
    fraction = fraction * (1.0 + r) / (1.0 + change);
    if (--until_rebalance == 0) {
      until_rebalance = static_cast<std::size_t>(strategy.period);
      const auto next = rebalance(PortfolioState{1.0, fraction}, strategy.f, fee, strategy.eps);
      if (!(next.total > 0.0)) return minus_infinity;
      log_wealth += std::log(next.total);
      fraction = next.invested / next.total;
    }
  }
  return log_wealth / static_cast<double>(path.size());
}

/// Mean growth across realizations with its standard error.
inline GrowthEstimate simulate_growth(const SimConfig& config, const Strategy& strategy) {
  validate(config);
  validate(strategy);
  std::vector<double> per_path(static_cast<std::size_t>(config.realizations));
  parallel_for(per_path.size(), config.threads, [&](std::size_t i) {
    per_path[i] = path_log_growth(realization_path(config, i), strategy, config.fee);
  });
  const auto summary = summarize(per_path);
  return make_estimate(summary.mean, summary.standard_error);
}

struct SweepRow {
  double key = 0.0;  ///< period T or partial-rebalancing eps
  double f_star = 0.0;
  double G_star = 0.0;
  double stderr_ = 0.0;  ///< standard error at the best grid point
};

struct Sweep {
  std::vector<SweepRow> rows;
  SweepRow best;
};

namespace detail {

/// samples[j] holds the per-realization growth at f_grid[j]. Picks the grid
/// argmax of the mean and refines it with a parabola through its neighbours.
inline SweepRow best_on_grid(std::span<const double> f_grid, const std::vector<std::vector<double>>& samples) {
  std::vector<double> means(f_grid.size());
  for (std::size_t j = 0; j < f_grid.size(); ++j) means[j] = summarize(samples[j]).mean;
  std::size_t best = 0;
  for (std::size_t j = 1; j < means.size(); ++j) {
    if (means[j] > means[best]) best = j;
  }
  SweepRow row{0.0, f_grid[best], means[best], summarize(samples[best]).standard_error};
  if (best > 0 && best + 1 < means.size() && std::isfinite(means[best - 1]) && std::isfinite(means[best + 1])) {
    const double x0 = f_grid[best - 1], x1 = f_grid[best], x2 = f_grid[best + 1];
    const double y0 = means[best - 1], y1 = means[best], y2 = means[best + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0);
    if (curvature < 0.0) {
      const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
      if (vertex > x0 && vertex < x2) {
        row.f_star = vertex;
        row.G_star = y1 + d01 * (vertex - x1) + curvature * (vertex - x0) * (vertex - x1);
      }
    }
  }
  return row;
}

inline Sweep collect(std::span<const double> keys, std::span<const double> f_grid,
                     const std::vector<std::vector<double>>& per_realization) {
  // per_realization[i][k * grid + j]
  Sweep sweep;
  const std::size_t grid = f_grid.size();
  for (std::size_t k = 0; k < keys.size(); ++k) {
    std::vector<std::vector<double>> samples(grid, std::vector<double>(per_realization.size()));
    for (std::size_t i = 0; i < per_realization.size(); ++i) {
      for (std::size_t j = 0; j < grid; ++j) samples[j][i] = per_realization[i][k * grid + j];
    }
    SweepRow row = best_on_grid(f_grid, samples);
    row.key = keys[k];
    sweep.rows.push_back(row);
  }
  sweep.best = sweep.rows.front();
  for (const auto& row : sweep.rows) {
    if (row.G_star > sweep.best.G_star) sweep.best = row;
  }
  return sweep;
}

inline void require_grid(std::span<const double> grid, double lo, double hi, const char* message) {
  require(!grid.empty(), message);
  for (double x : grid) require(x >= lo && x <= hi, message);
}

}  // namespace detail

/// Period sweep for several fees at once on shared paths. Within a window of T
/// steps the portfolio is not touched, so its growth depends on the path only
/// through the window's compound return.
inline std::vector<Sweep> sweep_period(const SimConfig& config, std::span<const double> alphas,
                                       std::span<const int> periods, std::span<const double> f_grid) {
  validate(config);
  detail::require(!alphas.empty() && !periods.empty(), "sweep needs fees and periods");
  for (double a : alphas) validate(FeeSchedule{a});
  for (int t : periods) detail::require(t >= 1, "periods must be at least 1");
  detail::require_grid(f_grid, 0.0, 1.0, "f grid must be non-empty and lie in [0, 1]");

  const std::size_t grid = f_grid.size();
  const std::size_t per_fee = periods.size() * grid;
  // samples[i][a * per_fee + k * grid + j]
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(config.realizations));
  parallel_for(samples.size(), config.threads, [&](std::size_t i) {
    const auto path = realization_path(config, i);
    std::vector<double> log_returns(path.size());
    std::transform(path.begin(), path.end(), log_returns.begin(), [](double r) { return std::log1p(r); });
    auto& out = samples[i];
    out.assign(alphas.size() * per_fee, 0.0);
    std::vector<double> windows;
    for (std::size_t k = 0; k < periods.size(); ++k) {
      const std::size_t period = static_cast<std::size_t>(periods[k]);
      windows.clear();
      double tail = 0.0;
      for (std::size_t start = 0; start < log_returns.size(); start += period) {
        const std::size_t end = std::min(start + period, log_returns.size());
        double sum = 0.0;
        for (std::size_t t = start; t < end; ++t) sum += log_returns[t];
        if (end - start == period) {
          windows.push_back(std::expm1(sum));
        } else {
          tail = std::expm1(sum);
        }
      }
      const bool has_tail = log_returns.size() % period != 0;
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const FeeSchedule fee{alphas[a]};
        for (std::size_t j = 0; j < grid; ++j) {
          const double f = f_grid[j];
          double total = 0.0;
          if (f != 0.0) {
            for (const double w : windows) total += log_wealth_factor(f, w, fee);
            if (has_tail) total += (f * tail > -1.0) ? std::log1p(f * tail) : minus_infinity;
          }
          out[a * per_fee + k * grid + j] = total / static_cast<double>(log_returns.size());
        }
      }
    }
  });

  std::vector<double> keys(periods.begin(), periods.end());
  std::vector<Sweep> result;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    std::vector<std::vector<double>> slice(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      slice[i].assign(samples[i].begin() + static_cast<std::ptrdiff_t>(a * per_fee),
                      samples[i].begin() + static_cast<std::ptrdiff_t>((a + 1) * per_fee));
    }
    result.push_back(detail::collect(keys, f_grid, slice));
  }
  return result;
}

/// Period sweep at the configured fee.
inline Sweep sweep_period(const SimConfig& config, std::span<const int> periods, std::span<const double> f_grid) {
  const double alpha = config.fee.alpha;
  return sweep_period(config, std::span<const double>(&alpha, 1), periods, f_grid).front();
}

/// Partial-rebalancing sweep: every step, eps of the required transfer is
/// executed. All (eps, f) pairs see the same paths.
inline Sweep sweep_partial(const SimConfig& config, std::span<const double> eps_grid, std::span<const double> f_grid) {
  validate(config);
  detail::require_grid(eps_grid, 0.0, 1.0, "eps grid must be non-empty and lie in (0, 1]");
  for (double e : eps_grid) detail::require(e > 0.0, "eps grid must lie in (0, 1]");
  detail::require_grid(f_grid, 0.0, 1.0, "f grid must be non-empty and lie in [0, 1]");
  const std::size_t grid = f_grid.size();
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(config.realizations));
  parallel_for(samples.size(), config.threads, [&](std::size_t i) {
    const auto path = realization_path(config, i);
    auto& out = samples[i];
    out.resize(eps_grid.size() * grid);
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
      for (std::size_t j = 0; j < grid; ++j) {
        out[k * grid + j] = path_log_growth(path, Strategy{f_grid[j], 1, eps_grid[k]}, config.fee);
      }
    }
  });
  return detail::collect(eps_grid, f_grid, samples);
}

}  // namespace kelly
