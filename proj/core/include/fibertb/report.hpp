#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fibertb/estimation.hpp"

namespace fibertb {

/// One line of a report: `name=<name> kind=<kind> key=value ...`.
///
/// Field order is preserved, numbers are printed with 10 significant
/// digits, so equal inputs always produce byte-identical files.
struct ReportRecord {
  using Value = std::variant<double, std::string>;

  std::string name;
  std::string kind;
  std::vector<std::pair<std::string, Value>> fields;

  ReportRecord& add(std::string key, double value);
  ReportRecord& add(std::string key, std::string value);

  std::optional<double> number(std::string_view key) const;
  std::optional<std::string> text(std::string_view key) const;
};

ReportRecord to_record(std::string name, const GaussianFit& fit, std::string unit);
ReportRecord to_record(std::string name, const PowerLawFit& fit);
ReportRecord to_record(std::string name, const LinearFit& fit, std::string unit);
ReportRecord to_record(std::string name, const SpanNoiseEstimate& estimate, std::string unit);

std::string format_record(const ReportRecord& record);
ReportRecord parse_record(std::string_view line);

void write_report(std::ostream& out, const std::vector<ReportRecord>& records);
std::vector<ReportRecord> read_report(std::istream& in);

/// Writes the records to `path`. Throws InvalidArgument for an empty list
/// and IoError when the file cannot be written.
void emit_report(const std::vector<ReportRecord>& records, const std::filesystem::path& path);
std::vector<ReportRecord> load_report(const std::filesystem::path& path);

/// Columnar plot data: a `#` header naming each column with its unit, then
/// one whitespace-separated row per x value.
struct PlotColumn {
  std::string name;
  std::vector<double> values;
};

void write_plot_data(const std::filesystem::path& path, const std::vector<PlotColumn>& columns);

}  // namespace fibertb
