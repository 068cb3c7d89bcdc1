#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "invlab/analyzer.hpp"

namespace invlab::cli {

inline constexpr int kSchemaVersion = 1;

/// Collected schema problems; the message lists all of them.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class Verb { flows, semigroup, invariance, capacity, mollifier, all };

const char* verb_name(Verb v);
std::optional<Verb> parse_verb(const std::string& name);

/// Knobs for the capacity and mollifier verbs.
struct ExperimentSettings {
  std::vector<int> cutoff_n{16, 32, 64, 128, 256, 512, 1024};
  /// Inverse spacing of the cutoff grid; 0 picks 65536 (1-D) or 256 (2-D).
  double cutoff_resolution = 0;
  std::vector<int> mollifier_n{8, 16, 32, 64, 128};
  /// Inverse spacing of the mollifier grid; 0 picks 4096 (1-D) or 512 (2-D).
  double mollifier_resolution = 0;
  /// Row of C driving the commutator experiment (1-based).
  int mollifier_row = 1;
  /// Test function for the commutator; width 0 picks a default.
  InitialState mollifier_phi{"bump", {0.0, 0.0}, 0.0};
};

struct RunConfig {
  Verb verb = Verb::invariance;
  Scenario scenario;
  ExperimentSettings experiments;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

/// Parses a config document against the schema. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_file(const std::string& path);

/// Semantic checks (dimensions, resolutions, verb preconditions) after
/// command-line overrides. Throws ConfigError.
void validate_config(const RunConfig& config);

/// Echo of the scenario in the config schema.
nlohmann::json scenario_to_json(const Scenario& s);

/// Fills in experiment defaults that depend on the scenario dimension.
void resolve_defaults(RunConfig& config);

}  // namespace invlab::cli
