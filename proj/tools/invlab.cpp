#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/runner.hpp"

namespace {

std::vector<double> parse_resolutions(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw invlab::cli::ConfigError({"--resolutions: '" + item + "' is not a number"});
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace invlab::cli;

  CLI::App app{"Invariance experiments for degenerate divergence-form operators"};
  std::string config_path;
  std::string scenario_name;
  std::string out_dir;
  std::string verb_text;
  std::string resolutions;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool list = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--scenario", scenario_name, "Built-in scenario, instead of --config");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for quasi-random sampling");
  app.add_option("--verb", verb_text, "flows, semigroup, invariance, capacity, mollifier or all");
  app.add_option("--resolutions", resolutions, "Comma-separated inverse grid spacings, e.g. 128,256,512");
  auto* workers_opt = app.add_option("--workers", workers, "Threads for trajectory sampling");
  app.add_flag("--list-scenarios", list, "Print the built-in scenario names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (list) {
    for (const auto& name : invlab::scenarios::builtin_names()) std::cout << name << "\n";
    return kExitOk;
  }

  RunConfig config;
  try {
    if (!config_path.empty() && !scenario_name.empty()) {
      throw ConfigError({"give either --config or --scenario, not both"});
    }
    if (!config_path.empty()) {
      config = parse_config_file(config_path);
    } else if (!scenario_name.empty()) {
      config.scenario = invlab::scenarios::builtin(scenario_name);
    } else {
      throw ConfigError({"no scenario: pass --config <path> or --scenario <name>"});
    }
    if (!verb_text.empty()) {
      const auto verb = parse_verb(verb_text);
      if (!verb) throw ConfigError({"--verb: unknown verb '" + verb_text + "'"});
      config.verb = *verb;
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (*seed_opt) config.seed = seed;
    if (!resolutions.empty()) config.scenario.resolutions = parse_resolutions(resolutions);
    if (*workers_opt) config.scenario.workers = workers;
    config.scenario.seed = config.seed;
    resolve_defaults(config);
    validate_config(config);
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return kExitConfig;
  } catch (const invlab::ValidationError& e) {
    std::cerr << "invalid configuration:\n  " << e.what() << "\n";
    return kExitConfig;
  }

  const RunOutcome outcome = run(config);
  try {
    write_outcome(config.out_dir, outcome);
  } catch (const std::exception& e) {
    std::cerr << "failed to write outputs: " << e.what() << "\n";
    return kExitComputation;
  }
  for (const auto& err : outcome.report["errors"]) {
    std::cerr << "error in " << err["verb"].get<std::string>() << ": " << err["message"].get<std::string>() << "\n";
  }
  std::cout << "status " << outcome.report["status"].get<std::string>() << ", outputs in " << config.out_dir << "\n";
  return outcome.exit_code;
}
