#include "hmc_ergo/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hmc_ergo/errors.hpp"

namespace hmc_ergo {

ReportSchema ReportSchema::of(const ReportRow& row) {
  ReportSchema schema;
  schema.probe = row.probe;
  for (const auto& [name, _] : row.inputs) schema.inputs.push_back(name);
  for (const auto& [name, _] : row.extras) schema.extras.push_back(name);
  return schema;
}

std::vector<std::string> ReportSchema::columns() const {
  std::vector<std::string> cols{"probe"};
  cols.insert(cols.end(), inputs.begin(), inputs.end());
  for (const char* c : {"estimate", "stderr", "n", "wall_time_s"}) cols.emplace_back(c);
  cols.insert(cols.end(), extras.begin(), extras.end());
  return cols;
}

bool ReportSchema::matches(const ReportRow& row) const {
  if (row.probe != probe || row.inputs.size() != inputs.size() || row.extras.size() != extras.size()) return false;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (row.inputs[i].first != inputs[i]) return false;
  }
  for (std::size_t i = 0; i < extras.size(); ++i) {
    if (row.extras[i].first != extras[i]) return false;
  }
  return true;
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* l = std::get_if<long>(&cell)) return std::to_string(*l);
  return std::get<std::string>(cell);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

void check_finite(const std::string& probe, const std::string& column, double value) {
  if (!std::isfinite(value)) throw SchemaError("row '" + probe + "' has non-finite " + column);
}

void check_finite(const std::string& probe, const NamedCells& cells) {
  for (const auto& [name, cell] : cells) {
    if (const auto* d = std::get_if<double>(&cell)) check_finite(probe, name, *d);
  }
}

void write_line(std::ostringstream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_quote(fields[i]);
  }
  out << "\r\n";
}

}  // namespace

std::string render_report(const ReportSchema& schema, std::span<const ReportRow> rows,
                          const std::vector<std::string>& preamble) {
  std::ostringstream out;
  for (const auto& line : preamble) out << "# " << line << "\r\n";
  write_line(out, schema.columns());
  for (const auto& row : rows) {
    if (!schema.matches(row)) {
      throw SchemaError("row of probe '" + row.probe + "' does not match report schema for '" + schema.probe + "'");
    }
    check_finite(row.probe, "estimate", row.estimate);
    check_finite(row.probe, "stderr", row.std_error);
    check_finite(row.probe, "wall_time_s", row.wall_time_s);
    check_finite(row.probe, row.inputs);
    check_finite(row.probe, row.extras);

    std::vector<std::string> fields{row.probe};
    for (const auto& [_, cell] : row.inputs) fields.push_back(format_cell(cell));
    fields.push_back(format_number(row.estimate));
    fields.push_back(format_number(row.std_error));
    fields.push_back(std::to_string(row.n));
    fields.push_back(format_number(row.wall_time_s));
    for (const auto& [_, cell] : row.extras) fields.push_back(format_cell(cell));
    write_line(out, fields);
  }
  return out.str();
}

void emit_report(const ReportSchema& schema, std::span<const ReportRow> rows, const std::filesystem::path& path,
                 const std::vector<std::string>& preamble) {
  const std::string text = render_report(schema, rows, preamble);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open report file " + path.string());
  file << text;
  file.flush();
  if (!file) throw std::runtime_error("failed writing report file " + path.string());
}

}  // namespace hmc_ergo
