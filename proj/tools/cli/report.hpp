#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace invlab::cli {

/// Shortest decimal form that reads back to the same double; nan and inf
/// spelled out.
std::string format_double(double v);

/// Header plus rows of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  void add(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// One line of summary.csv.
struct SummaryRow {
  std::string scenario;
  std::string verb;
  std::string check;
  std::string value;
  std::string threshold;
  /// pass, fail, info, true, false or indeterminate.
  std::string status;
};

CsvTable summary_table(const std::vector<SummaryRow>& rows);

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace invlab::cli
