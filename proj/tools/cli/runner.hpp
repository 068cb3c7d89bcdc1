#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "report.hpp"

namespace invlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitIndeterminate = 2;
inline constexpr int kExitConfig = 64;

/// Version of the report.json layout.
inline constexpr int kReportVersion = 1;

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::vector<SummaryRow> summary;
  /// File name and contents of each verb table (flows.csv, ...).
  std::vector<std::pair<std::string, CsvTable>> tables;
};

/// Runs the configured verb. Computation failures are caught and recorded
/// in the outcome (exit code 1) so that partial results are still written.
RunOutcome run(const RunConfig& config);

/// Creates `dir` and writes report.json, summary.csv and the verb tables.
void write_outcome(const std::filesystem::path& dir, const RunOutcome& outcome);

}  // namespace invlab::cli
