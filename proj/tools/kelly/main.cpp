// kelly: growth-optimal fractions and rebalancing schedules under fees.

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using kelly::cli::json;
using kelly::cli::usage_error;

// Flags shared by every computing subcommand; value is the JSON key.
const std::map<std::string, std::string> numeric_flags{
    {"r1", "r1"},       {"p1", "p1"},         {"r2", "r2"},         {"p2", "p2"},
    {"t2", "t2"},       {"m", "m"},           {"d", "d"},           {"sigma", "sigma"},
    {"a0", "a0"},       {"a1", "a1"},         {"b", "b"},           {"drift", "drift"},
    {"alpha-min", "alpha_min"}, {"alpha-max", "alpha_max"}, {"alpha-points", "alpha_points"},
    {"p1-min", "p1_min"}, {"p1-max", "p1_max"}, {"p1-points", "p1_points"},
    {"m-min", "m_min"}, {"m-max", "m_max"},   {"m-points", "m_points"},
    {"period", "period"}, {"t-min", "t_min"}, {"t-max", "t_max"},
    {"steps", "steps"}, {"realizations", "realizations"}, {"seed", "seed"}, {"threads", "threads"},
};
const std::map<std::string, std::string> flag_help{
    {"r1", "binary return magnitude"},
    {"p1", "binary win-probability excess over 1/2"},
    {"r2", "two-scale slow return magnitude"},
    {"p2", "two-scale slow probability excess"},
    {"t2", "two-scale slow period"},
    {"m", "lognormal log-return mean"},
    {"d", "lognormal log-return variance"},
    {"sigma", "Student-t scale"},
    {"a0", "GARCH constant"},
    {"a1", "GARCH shock weight"},
    {"b", "GARCH persistence"},
    {"drift", "Student/GARCH log-return mean"},
    {"alpha-min", "log-spaced fee sweep, lower end"},
    {"alpha-max", "log-spaced fee sweep, upper end"},
    {"alpha-points", "log-spaced fee sweep, point count"},
    {"p1-min", "P1 sweep, lower end"},
    {"p1-max", "P1 sweep, upper end"},
    {"p1-points", "P1 sweep, point count"},
    {"m-min", "m sweep, lower end"},
    {"m-max", "m sweep, upper end"},
    {"m-points", "m sweep, point count"},
    {"period", "rebalancing period"},
    {"t-min", "smallest period searched"},
    {"t-max", "largest period searched"},
    {"steps", "Monte-Carlo steps per path"},
    {"realizations", "Monte-Carlo paths"},
    {"seed", "master seed"},
    {"threads", "worker threads, 0 = all cores"},
};
const std::map<std::string, std::string> list_flags{{"alpha", "alpha"}, {"eps-grid", "eps_grid"}, {"f-grid", "f_grid"}};
const std::set<std::string> integer_keys{"t2", "alpha_points", "p1_points", "m_points", "period", "t_min",
                                         "t_max", "steps", "realizations", "seed", "threads"};

json parse_number(const std::string& flag, const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  if (integer_keys.count(key)) {
    const long long v = std::strtoll(begin, &end, 10);
    if (end != begin && *end == '\0' && errno == 0) return v;
  } else {
    const double v = std::strtod(begin, &end);
    if (end != begin && *end == '\0' && errno == 0) return v;
  }
  throw usage_error("--" + flag + ": cannot parse '" + text + "'");
}

json parse_list(const std::string& flag, const std::string& key, const std::string& text) {
  json out = json::array();
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number(flag, key, item));
  if (out.empty()) throw usage_error("--" + flag + " must not be empty");
  return out;
}

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw usage_error(std::string(what) + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw usage_error(std::string(what) + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw usage_error("--out: cannot write '" + path + "'");
}

struct Flags {
  std::map<std::string, std::string> values;
  std::string model;
  std::string scale;
  std::string config;
  std::string out;
  bool mc = false;
  bool gnuplot = false;
};

void add_flags(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--model", flags.model, "binary, two-scale, lognormal, student or garch");
  for (const auto& [flag, key] : numeric_flags) cmd.add_option("--" + flag, flags.values[flag], flag_help.at(flag));
  for (const auto& [flag, key] : list_flags) cmd.add_option("--" + flag, flags.values[flag], "comma-separated list");
  cmd.add_option("--scale", flags.scale, "Monte-Carlo size: full or reduced");
  cmd.add_flag("--mc", flags.mc, "force Monte-Carlo evaluation");
  cmd.add_option("--config", flags.config, "JSON file with parameter defaults");
  cmd.add_option("--out", flags.out, "CSV output path; a manifest is written next to it");
  cmd.add_flag("--gnuplot", flags.gnuplot, "also write a gnuplot script next to the CSV");
}

json effective_parameters(const CLI::App& cmd, const Flags& flags) {
  json params = kelly::cli::default_parameters();
  if (!flags.config.empty()) {
    const json file = read_json_file(flags.config, "--config");
    if (!file.is_object()) throw usage_error("--config must contain a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!params.contains(key)) throw usage_error("--config: unknown key '" + key + "'");
      params[key] = value;
    }
  }
  const auto given = [&](const std::string& flag) { return cmd.count("--" + flag) > 0; };
  if (given("model")) params["model"] = flags.model;
  if (given("scale")) params["scale"] = flags.scale;
  if (given("mc")) params["mc"] = flags.mc;
  for (const auto& [flag, key] : numeric_flags) {
    if (given(flag)) params[key] = parse_number(flag, key, flags.values.at(flag));
  }
  for (const auto& [flag, key] : list_flags) {
    if (given(flag)) params[key] = parse_list(flag, key, flags.values.at(flag));
  }
  // An explicit --alpha overrides a log-spaced range from the config file.
  if (given("alpha")) params["alpha_points"] = nullptr;
  return params;
}

void emit(const std::string& command, const json& params, const std::string& out, bool gnuplot) {
  const auto result = kelly::cli::run_command(command, params);
  if (out.empty()) {
    std::cout << result.csv;
    std::cerr << result.summary << '\n';
    return;
  }
  write_text(out, result.csv);
  write_text(out + ".manifest.json", kelly::cli::make_manifest(command, params, out, result.results).dump(2) + "\n");
  if (gnuplot) write_text(out + ".gp", kelly::cli::gnuplot_script(command, out));
  std::cout << result.summary << '\n' << "wrote " << out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Growth-optimal investment under proportional transaction fees"};
  app.require_subcommand(1);

  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> commands;
  const std::map<std::string, std::string> help{
      {"optimal-fraction", "optimal fraction vs fee, P1 or m"},
      {"thresholds", "fee thresholds between rebalancing periods"},
      {"optimal-period", "optimal rebalancing period vs fee"},
      {"two-scale", "optimal fraction and growth vs period for a two-scale asset"},
      {"partial", "growth under partial rebalancing vs eps"},
  };
  for (const auto& name : kelly::cli::command_names()) {
    commands[name] = app.add_subcommand(name, help.at(name));
    add_flags(*commands[name], flags[name]);
  }
  std::string manifest_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "re-run a manifest");
  replay->add_option("manifest", manifest_path, "manifest JSON")->required();
  replay->add_option("--out", replay_out, "write to this path instead of the recorded one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (replay->parsed()) {
      const json manifest = read_json_file(manifest_path, "manifest");
      if (!manifest.contains("command") || !manifest.contains("parameters")) {
        throw usage_error("manifest: missing command or parameters");
      }
      const std::string out = replay_out.empty() ? manifest.value("output", std::string()) : replay_out;
      emit(manifest.at("command").get<std::string>(), manifest.at("parameters"), out, false);
      return 0;
    }
    for (const auto& [name, cmd] : commands) {
      if (!cmd->parsed()) continue;
      const auto& f = flags.at(name);
      emit(name, effective_parameters(*cmd, f), f.out, f.gnuplot);
    }
  } catch (const std::invalid_argument& e) {  // usage_error, parameter_error
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const kelly::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
