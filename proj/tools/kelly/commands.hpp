#pragma once

// Command implementations behind the `kelly` executable. Each command maps an
// effective parameter set (JSON object, keys are flag names without dashes and
// with '-' replaced by '_') to CSV text plus a JSON block of derived results.

#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kelly/kelly.hpp"

namespace kelly::cli {

using nlohmann::json;

inline constexpr const char* tool_version = "0.1.0";

/// Invalid flag values; the message names the flag.
class usage_error : public std::invalid_argument {
public:
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// ---------------------------------------------------------------------------
// CSV

/// Fixed numeric format: 17 significant digits, '.', ',', '\n'.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
public:
  explicit CsvWriter(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  CsvWriter& cell(double x) { return raw(format_number(x)); }
  CsvWriter& cell(int x) { return raw(std::to_string(x)); }
  CsvWriter& cell(const std::string& s) { return raw(s); }

  void end_row() {
    out_ << '\n';
    fresh_ = true;
  }

  std::string str() const { return out_.str(); }

private:
  CsvWriter& raw(const std::string& s) {
    if (!fresh_) out_ << ',';
    out_ << s;
    fresh_ = false;
    return *this;
  }

  std::ostringstream out_;
  bool fresh_ = true;
};

// ---------------------------------------------------------------------------
// Parameters

inline json default_parameters() {
  return json{
      {"model", "binary"},
      {"r1", 0.1},
      {"p1", 0.02},
      {"r2", 0.5},
      {"p2", 0.05},
      {"t2", 10},
      {"m", 0.0},
      {"d", 0.01},
      {"sigma", 0.01},
      {"a0", 1e-5},
      {"a1", 0.2},
      {"b", 0.7},
      {"drift", 0.0},
      {"alpha", json::array({0.0})},
      {"alpha_min", nullptr},
      {"alpha_max", nullptr},
      {"alpha_points", nullptr},
      {"p1_min", nullptr},
      {"p1_max", nullptr},
      {"p1_points", nullptr},
      {"m_min", nullptr},
      {"m_max", nullptr},
      {"m_points", nullptr},
      {"period", 1},
      {"t_min", 1},
      {"t_max", nullptr},
      {"eps_grid", json::array({0.02, 0.04, 0.06, 0.08, 0.1, 0.13, 0.16, 0.21, 0.26, 0.32, 0.4, 0.5, 0.65, 0.8, 1.0})},
      {"f_grid", nullptr},
      {"scale", "full"},
      {"steps", nullptr},
      {"realizations", nullptr},
      {"seed", 1},
      {"threads", 0},
      {"mc", false},
  };
}

namespace detail {

inline std::string flag(const char* key) {
  std::string s = std::string("--") + key;
  for (auto& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

inline bool has(const json& p, const char* key) { return p.contains(key) && !p.at(key).is_null(); }

inline double number(const json& p, const char* key) {
  if (!has(p, key) || !p.at(key).is_number()) throw usage_error(flag(key) + " must be a number");
  return p.at(key).get<double>();
}

inline long long integer(const json& p, const char* key) {
  const double x = number(p, key);
  if (x != std::floor(x)) throw usage_error(flag(key) + " must be an integer");
  return static_cast<long long>(x);
}

inline std::vector<double> numbers(const json& p, const char* key) {
  if (!has(p, key)) throw usage_error(flag(key) + " is required");
  const auto& v = p.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw usage_error(flag(key) + " must be a non-empty list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw usage_error(flag(key) + " must be a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline void check(bool ok, const char* key, const char* what) {
  if (!ok) throw usage_error(flag(key) + " " + what);
}

inline std::string model_name(const json& p) {
  if (!has(p, "model") || !p.at("model").is_string()) throw usage_error("--model must be a string");
  const auto name = p.at("model").get<std::string>();
  for (const char* known : {"binary", "two-scale", "lognormal", "student", "garch"}) {
    if (name == known) return name;
  }
  throw usage_error("--model must be one of binary, two-scale, lognormal, student, garch");
}

inline BinaryAsset binary_asset(const json& p, double p1) {
  const double r1 = number(p, "r1");
  check(r1 > 0.0 && r1 <= 1.0, "r1", "must lie in (0, 1]");
  check(p1 > -0.5 && p1 <= 0.5, "p1", "must lie in (-1/2, 1/2]");
  return {r1, p1};
}

inline BinaryAsset binary_asset(const json& p) { return binary_asset(p, number(p, "p1")); }

inline TwoScaleAsset two_scale_asset(const json& p) {
  TwoScaleAsset a{binary_asset(p), number(p, "r2"), number(p, "p2"), static_cast<int>(integer(p, "t2"))};
  check(a.r2 > 0.0 && a.r2 <= 1.0, "r2", "must lie in (0, 1]");
  check(a.p2 > -0.5 && a.p2 <= 0.5, "p2", "must lie in (-1/2, 1/2]");
  check(a.t2 >= 2, "t2", "must be at least 2");
  return a;
}

inline LognormalAsset lognormal_asset(const json& p, double m) {
  const double d = number(p, "d");
  check(d > 0.0, "d", "must be positive");
  check(std::isfinite(m), "m", "must be finite");
  return {m, d};
}

inline AssetModel asset_model(const json& p) {
  const auto name = model_name(p);
  if (name == "binary") return binary_asset(p);
  if (name == "two-scale") return two_scale_asset(p);
  if (name == "lognormal") return lognormal_asset(p, number(p, "m"));
  if (name == "student") {
    StudentAsset a{number(p, "sigma"), number(p, "drift")};
    check(a.sigma > 0.0, "sigma", "must be positive");
    return a;
  }
  GarchAsset g{number(p, "a0"), number(p, "a1"), number(p, "b"), number(p, "drift")};
  check(g.a0 > 0.0, "a0", "must be positive");
  check(g.a1 >= 0.0, "a1", "must be non-negative");
  check(g.b >= 0.0, "b", "must be non-negative");
  check(g.a1 + g.b < 1.0, "b", "must satisfy a1 + b < 1");
  return g;
}

inline double checked_alpha(double a) {
  check(a >= 0.0 && a < 1.0, "alpha", "must lie in [0, 1)");
  return a;
}

inline std::vector<double> linear_range(const json& p, const char* lo, const char* hi, const char* points) {
  const double a = number(p, lo);
  const double b = number(p, hi);
  const long long n = integer(p, points);
  check(n >= 1, points, "must be at least 1");
  check(b >= a, hi, "must not be below its minimum");
  std::vector<double> out;
  for (long long i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1));
  return out;
}

/// Fee values: a log-spaced range when --alpha-points is given, else --alpha.
inline std::vector<double> alphas(const json& p) {
  std::vector<double> out;
  if (has(p, "alpha_points")) {
    const double lo = number(p, "alpha_min");
    const double hi = number(p, "alpha_max");
    const long long n = integer(p, "alpha_points");
    check(lo > 0.0, "alpha_min", "must be positive for a log-spaced range");
    check(hi >= lo, "alpha_max", "must not be below --alpha-min");
    check(n >= 1, "alpha_points", "must be at least 1");
    for (long long i = 0; i < n; ++i) {
      out.push_back(n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) / (n - 1)));
    }
  } else {
    out = numbers(p, "alpha");
  }
  for (double a : out) checked_alpha(a);
  return out;
}

inline std::vector<double> f_grid(const json& p) {
  std::vector<double> grid;
  if (has(p, "f_grid")) {
    grid = numbers(p, "f_grid");
  } else {
    for (int j = 1; j <= 19; ++j) grid.push_back(0.05 * j);
  }
  for (double f : grid) check(f >= 0.0 && f <= 1.0, "f_grid", "values must lie in [0, 1]");
  return grid;
}

inline unsigned threads(const json& p) {
  const long long t = integer(p, "threads");
  check(t >= 0, "threads", "must be non-negative");
  return static_cast<unsigned>(t);
}

inline SimConfig sim_config(const json& p) {
  SimConfig c;
  c.model = asset_model(p);
  const auto scale = p.value("scale", std::string("full"));
  if (scale == "full") {
    c.scale(full_scale);
  } else if (scale == "reduced") {
    c.scale(reduced_scale);
  } else {
    throw usage_error("--scale must be full or reduced");
  }
  if (has(p, "steps")) c.steps = integer(p, "steps");
  if (has(p, "realizations")) c.realizations = static_cast<int>(integer(p, "realizations"));
  check(c.steps >= 1 && c.steps <= 2'000'000'000LL, "steps", "must lie in [1, 2e9]");
  check(c.realizations >= 1, "realizations", "must be at least 1");
  const long long seed = integer(p, "seed");
  check(seed >= 0, "seed", "must be non-negative");
  c.master_seed = static_cast<std::uint64_t>(seed);
  c.threads = threads(p);
  return c;
}

}  // namespace detail

struct CommandResult {
  std::string csv;
  json results = json::object();
  std::string summary;
};

// ---------------------------------------------------------------------------
// optimal-fraction

inline CommandResult optimal_fraction(const json& p) {
  using namespace detail;
  const auto model = model_name(p);
  if (model != "binary" && model != "lognormal") {
    throw usage_error("--model must be binary or lognormal for optimal-fraction");
  }
  const int period = static_cast<int>(integer(p, "period"));
  check(period >= 1, "period", "must be at least 1");

  struct Point {
    double sweep_value;
    double alpha;
    double shape;  // p1 for binary, m for lognormal
  };
  std::vector<Point> points;
  std::string swept = "alpha";
  const double base_shape = model == "binary" ? number(p, "p1") : number(p, "m");
  if (model == "binary" && has(p, "p1_points")) {
    swept = "p1";
    const double a = checked_alpha(alphas(p).front());
    for (double v : linear_range(p, "p1_min", "p1_max", "p1_points")) points.push_back({v, a, v});
  } else if (model == "lognormal" && has(p, "m_points")) {
    swept = "m";
    const double a = checked_alpha(alphas(p).front());
    for (double v : linear_range(p, "m_min", "m_max", "m_points")) points.push_back({v, a, v});
  } else {
    for (double a : alphas(p)) points.push_back({a, a, base_shape});
  }

  CsvWriter csv{"sweep_var", "f_numeric", "f_closed_form", "G_numeric"};
  for (const auto& pt : points) {
    const FeeSchedule fee{pt.alpha};
    double closed = NAN;
    FractionOptimum opt;
    if (model == "binary") {
      const auto asset = binary_asset(p, pt.shape);
      opt = maximize_fraction(binary_growth_fn(asset, period, fee));
      if (period <= 4) {
        try {
          closed = approx_f_period(period, asset.p1, asset.r1, pt.alpha).value;
        } catch (const parameter_error&) {
          closed = NAN;
        }
      }
    } else {
      const auto asset = lognormal_asset(p, pt.shape);
      opt = maximize_fraction(lognormal_growth_fn(asset, period, fee));
      if (period == 1) {
        closed = std::fabs(asset.m) < 0.5 * asset.d ? lognormal_closed_forms(asset.m, asset.d, pt.alpha).f_star
                                                    : std::clamp(0.5 + asset.m / asset.d, 0.0, 1.0);
      }
    }
    csv.cell(pt.sweep_value).cell(opt.f_star).cell(closed).cell(opt.G_star);
    csv.end_row();
  }
  CommandResult out{csv.str(), json{{"sweep_variable", swept}, {"points", points.size()}}, {}};
  out.summary = "optimal-fraction: " + std::to_string(points.size()) + " points swept over " + swept;
  return out;
}

// ---------------------------------------------------------------------------
// thresholds

inline CommandResult thresholds(const json& p) {
  using namespace detail;
  std::vector<double> p1s = has(p, "p1_points") ? linear_range(p, "p1_min", "p1_max", "p1_points")
                                                : std::vector<double>{number(p, "p1")};
  CsvWriter csv{"P1", "alpha_x_formula", "alpha_x_numeric", "alpha_z_formula", "alpha_z_numeric"};
  double worst_gap = 0.0;
  for (double p1 : p1s) {
    const auto asset = binary_asset(p, p1);
    check(p1 > 0.0 && p1 <= 0.5 * asset.r1, "p1", "must lie in (0, r1/2] for thresholds");
    const auto formula = threshold_fees(p1, asset.r1);
    const double x_num = threshold_fee_numeric(asset, 1, 2);
    const double z_num = threshold_fee_numeric(asset, 2, 4);
    if (x_num > 0.0) worst_gap = std::max(worst_gap, std::fabs(formula.alpha_x - x_num) / x_num);
    csv.cell(p1).cell(formula.alpha_x).cell(x_num).cell(formula.alpha_z).cell(z_num);
    csv.end_row();
  }
  CommandResult out{csv.str(), json{{"max_relative_gap_alpha_x", worst_gap}}, {}};
  out.summary = "thresholds: " + std::to_string(p1s.size()) + " rows, max alpha_x relative gap " + format_number(worst_gap);
  return out;
}

// ---------------------------------------------------------------------------
// optimal-period

inline std::vector<int> period_list(int t_min, int t_max) {
  std::vector<int> out(static_cast<std::size_t>(t_max - t_min + 1));
  std::iota(out.begin(), out.end(), t_min);
  return out;
}

inline std::optional<double> fitted_slope(const std::vector<double>& alphas, const std::vector<double>& t_star) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] > 0.0) {
      x.push_back(alphas[i]);
      y.push_back(t_star[i]);
    }
  }
  if (x.size() < 2 || x.front() == x.back()) return std::nullopt;
  return loglog_slope(x, y);
}

inline CommandResult optimal_period(const json& p) {
  using namespace detail;
  const auto model = model_name(p);
  const bool mc = p.value("mc", false) || model == "student" || model == "garch";
  const int t_max = has(p, "t_max") ? static_cast<int>(integer(p, "t_max")) : (mc ? 100 : 1000);
  check(t_max >= 1, "t_max", "must be at least 1");
  const auto fee_values = alphas(p);
  const unsigned workers = threads(p);

  std::vector<Optimum> best;
  if (mc) {
    const auto config = sim_config(p);
    const auto periods = period_list(1, t_max);
    const auto grid = f_grid(p);
    for (const auto& sweep : sweep_period(config, fee_values, periods, grid)) {
      best.push_back({sweep.best.f_star, static_cast<int>(sweep.best.key), sweep.best.G_star});
    }
  } else {
    const auto asset = asset_model(p);
    for (double a : fee_values) {
      const FeeSchedule fee{a};
      const auto search = std::visit(
          [&](const auto& x) -> PeriodSearch {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, BinaryAsset> || std::is_same_v<T, TwoScaleAsset> ||
                          std::is_same_v<T, LognormalAsset>) {
              return maximize_period(x, fee, t_max, workers);
            } else {
              throw usage_error("--mc is required for this model");
            }
          },
          asset);
      best.push_back(search.best);
    }
  }

  CsvWriter csv{"alpha", "T_star", "f_star", "G_star"};
  std::vector<double> t_star;
  for (std::size_t i = 0; i < best.size(); ++i) {
    csv.cell(fee_values[i]).cell(*best[i].T_star).cell(best[i].f_star).cell(best[i].G_star);
    csv.end_row();
    t_star.push_back(*best[i].T_star);
  }
  const auto slope = fitted_slope(fee_values, t_star);
  CommandResult out{csv.str(), json{{"method", mc ? "monte-carlo" : "exact"}, {"t_max", t_max}}, {}};
  out.results["loglog_slope"] = slope ? json(*slope) : json(nullptr);
  out.summary = "optimal-period (" + std::string(mc ? "monte-carlo" : "exact") + "): " + std::to_string(best.size()) +
                " fee values" + (slope ? ", log-log slope " + format_number(*slope) : std::string());
  return out;
}

// ---------------------------------------------------------------------------
// two-scale

inline CommandResult two_scale(const json& p) {
  using namespace detail;
  const auto asset = two_scale_asset(p);
  const int t_min = static_cast<int>(integer(p, "t_min"));
  const int t_max = has(p, "t_max") ? static_cast<int>(integer(p, "t_max")) : 5 * asset.t2;
  check(t_min >= 1, "t_min", "must be at least 1");
  check(t_max >= t_min, "t_max", "must not be below --t-min");
  const FeeSchedule fee{alphas(p).front()};
  const auto periods = period_list(t_min, t_max);
  std::vector<PeriodPoint> rows(periods.size());
  parallel_for(periods.size(), threads(p), [&](std::size_t i) {
    const auto opt = maximize_fraction(two_scale_growth_fn(asset, periods[i], fee));
    rows[i] = {periods[i], opt.f_star, opt.G_star};
  });
  CsvWriter csv{"T", "f_star", "G_star", "aligned"};
  for (const auto& r : rows) {
    csv.cell(r.period).cell(r.f_star).cell(r.G_star).cell(r.period % asset.t2 == 0 ? 1 : 0);
    csv.end_row();
  }
  CommandResult out{csv.str(), json{{"rows", rows.size()}}, {}};
  out.summary = "two-scale: periods " + std::to_string(t_min) + ".." + std::to_string(t_max);
  return out;
}

// ---------------------------------------------------------------------------
// partial

inline CommandResult partial(const json& p) {
  using namespace detail;
  auto config = sim_config(p);
  const auto eps_grid = numbers(p, "eps_grid");
  for (double e : eps_grid) check(e > 0.0 && e <= 1.0, "eps_grid", "values must lie in (0, 1]");
  const auto grid = f_grid(p);
  const int t_max = has(p, "t_max") ? static_cast<int>(integer(p, "t_max")) : 100;
  check(t_max >= 1, "t_max", "must be at least 1");

  CsvWriter csv{"kind", "alpha", "eps", "T", "f_star", "G_star", "stderr"};
  json per_alpha = json::array();
  for (double a : alphas(p)) {
    config.fee = FeeSchedule{a};
    const auto sweep = sweep_partial(config, eps_grid, grid);
    for (const auto& r : sweep.rows) {
      csv.cell(std::string("partial")).cell(a).cell(r.key).cell(1).cell(r.f_star).cell(r.G_star).cell(r.stderr_);
      csv.end_row();
    }

    // Binary assets also get the stationary evaluator, free of sampling noise.
    json exact_best = nullptr;
    if (const auto* b = std::get_if<BinaryAsset>(&config.model)) {
      std::vector<FractionOptimum> optima(eps_grid.size());
      parallel_for(eps_grid.size(), config.threads, [&](std::size_t k) {
        optima[k] = maximize_fraction([&](double f) { return growth_partial_binary(*b, f, eps_grid[k], config.fee); }, 1e-6);
      });
      std::size_t top = 0;
      for (std::size_t k = 0; k < optima.size(); ++k) {
        csv.cell(std::string("partial_exact")).cell(a).cell(eps_grid[k]).cell(1).cell(optima[k].f_star).cell(optima[k].G_star).cell(NAN);
        csv.end_row();
        if (optima[k].G_star > optima[top].G_star) top = k;
      }
      exact_best = json{{"eps_star", eps_grid[top]}, {"f_star", optima[top].f_star}, {"G_star", optima[top].G_star}};
    }

    // Intermittent reference: exact optimal period where available, else the
    // Monte-Carlo optimum; its growth is re-estimated on the same paths.
    std::optional<PeriodSearch> exact;
    if (const auto* b = std::get_if<BinaryAsset>(&config.model)) exact = maximize_period(*b, config.fee, t_max, config.threads);
    if (const auto* t = std::get_if<TwoScaleAsset>(&config.model)) exact = maximize_period(*t, config.fee, t_max, config.threads);
    if (const auto* l = std::get_if<LognormalAsset>(&config.model)) exact = maximize_period(*l, config.fee, t_max, config.threads);
    int t_ref = 1;
    if (exact) {
      t_ref = *exact->best.T_star;
    } else {
      t_ref = static_cast<int>(sweep_period(config, period_list(1, t_max), grid).best.key);
    }
    const std::vector<int> ref_periods{t_ref};
    const auto reference = sweep_period(config, ref_periods, grid).rows.front();
    csv.cell(std::string("reference")).cell(a).cell(1.0).cell(t_ref).cell(reference.f_star).cell(reference.G_star).cell(reference.stderr_);
    csv.end_row();
    if (exact) {
      csv.cell(std::string("reference_exact")).cell(a).cell(1.0).cell(t_ref).cell(exact->best.f_star).cell(exact->best.G_star).cell(NAN);
      csv.end_row();
    }
    per_alpha.push_back(json{{"alpha", a},
                             {"eps_star", sweep.best.key},
                             {"G_partial", sweep.best.G_star},
                             {"T_reference", t_ref},
                             {"G_reference", reference.G_star},
                             {"partial_exact", exact_best}});
  }
  CommandResult out{csv.str(), json{{"per_alpha", per_alpha}}, {}};
  out.summary = "partial: " + std::to_string(per_alpha.size()) + " fee values x " + std::to_string(eps_grid.size()) + " eps values";
  return out;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"optimal-fraction", "thresholds", "optimal-period", "two-scale", "partial"};
  return names;
}

inline CommandResult run_command(const std::string& name, const json& params) {
  if (name == "optimal-fraction") return optimal_fraction(params);
  if (name == "thresholds") return thresholds(params);
  if (name == "optimal-period") return optimal_period(params);
  if (name == "two-scale") return two_scale(params);
  if (name == "partial") return partial(params);
  throw usage_error("unknown command '" + name + "'");
}

inline json make_manifest(const std::string& command, const json& params, const std::string& output, const json& results) {
  return json{{"command", command},
              {"parameters", params},
              {"seed", params.value("seed", 0)},
              {"version", tool_version},
              {"output", output},
              {"results", results}};
}

/// Minimal gnuplot script for a command's CSV.
inline std::string gnuplot_script(const std::string& command, const std::string& csv_path) {
  std::ostringstream s;
  s << "set datafile separator ','\nset key autotitle columnhead\n";
  if (command == "optimal-period") {
    s << "set logscale xy\nplot '" << csv_path << "' using 1:2 with linespoints\n";
  } else if (command == "partial") {
    s << "plot '" << csv_path << "' using 3:6 with linespoints\n";
  } else {
    s << "plot '" << csv_path << "' using 1:2 with linespoints, '' using 1:3 with lines\n";
  }
  return s.str();
}

}  // namespace kelly::cli
