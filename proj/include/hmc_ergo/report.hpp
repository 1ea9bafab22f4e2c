#ifndef HMC_ERGO_REPORT_HPP
#define HMC_ERGO_REPORT_HPP

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hmc_ergo {

using Cell = std::variant<double, long, std::string>;
using NamedCells = std::vector<std::pair<std::string, Cell>>;

/// One probe result. Columns: probe, <inputs...>, estimate, stderr, n,
/// wall_time_s, <extras...>.
struct ReportRow {
  std::string probe;
  NamedCells inputs;
  double estimate = 0;
  double std_error = 0;
  long n = 0;
  double wall_time_s = 0;
  NamedCells extras;
};

/// Column layout shared by every row of one report file.
struct ReportSchema {
  std::string probe;
  std::vector<std::string> inputs;
  std::vector<std::string> extras;

  static ReportSchema of(const ReportRow& row);
  std::vector<std::string> columns() const;
  bool matches(const ReportRow& row) const;
};

/// Shortest form of a double that keeps 17 significant digits.
std::string format_number(double value);
std::string format_cell(const Cell& cell);

/// RFC 4180 field quoting.
std::string csv_quote(const std::string& field);

/// Renders the CSV text: optional '#' preamble lines, the header, then rows.
/// Throws SchemaError if a row does not match the schema or holds a non-finite number.
std::string render_report(const ReportSchema& schema, std::span<const ReportRow> rows,
                          const std::vector<std::string>& preamble = {});

/// render_report written to path. I/O failures carry the path.
void emit_report(const ReportSchema& schema, std::span<const ReportRow> rows, const std::filesystem::path& path,
                 const std::vector<std::string>& preamble = {});

}  // namespace hmc_ergo

#endif  // HMC_ERGO_REPORT_HPP
