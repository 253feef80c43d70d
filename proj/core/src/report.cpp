#include "fibertb/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb {

namespace {

constexpr std::string_view kHeader = "# fibertb report v1";

std::string format_number(double v) { return fmt::format("{:.10g}", v); }

void check_token(std::string_view token, std::string_view what) {
  if (token.empty()) throw InvalidArgument(fmt::format("empty report {}", what));
  for (const char c : token) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '=') {
      throw InvalidArgument(fmt::format("report {} '{}' contains whitespace or '='", what, token));
    }
  }
}

std::optional<double> as_number(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

}  // namespace

ReportRecord& ReportRecord::add(std::string key, double value) {
  fields.emplace_back(std::move(key), value);
  return *this;
}

ReportRecord& ReportRecord::add(std::string key, std::string value) {
  fields.emplace_back(std::move(key), std::move(value));
  return *this;
}

std::optional<double> ReportRecord::number(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) {
      if (const auto* d = std::get_if<double>(&v)) return *d;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<std::string> ReportRecord::text(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) {
      if (const auto* s = std::get_if<std::string>(&v)) return *s;
      return format_number(std::get<double>(v));
    }
  }
  return std::nullopt;
}

ReportRecord to_record(std::string name, const GaussianFit& fit, std::string unit) {
  ReportRecord r{std::move(name), "gaussian", {}};
  r.add("variance", fit.variance)
      .add("variance_std_error", fit.variance_std_error)
      .add("mean", fit.mean)
      .add("n_samples", static_cast<double>(fit.n_samples))
      .add("unit", std::move(unit));
  return r;
}

ReportRecord to_record(std::string name, const PowerLawFit& fit) {
  ReportRecord r{std::move(name), "power_law", {}};
  r.add("kappa", fit.kappa)
      .add("kappa_std_error", fit.kappa_std_error)
      .add("n", fit.n_exponent)
      .add("n_std_error", fit.n_std_error)
      .add("r_squared", fit.r_squared)
      .add("adj_r_squared", fit.adj_r_squared)
      .add("n_points", static_cast<double>(fit.n_points))
      .add("n_excluded", static_cast<double>(fit.n_excluded));
  return r;
}

ReportRecord to_record(std::string name, const LinearFit& fit, std::string unit) {
  ReportRecord r{std::move(name), "linear", {}};
  r.add("slope", fit.slope)
      .add("slope_std_error", fit.slope_std_error)
      .add("intercept", fit.intercept)
      .add("intercept_std_error", fit.intercept_std_error)
      .add("r_squared", fit.r_squared)
      .add("adj_r_squared", fit.adj_r_squared)
      .add("n_points", static_cast<double>(fit.n_points))
      .add("unit", std::move(unit));
  return r;
}

ReportRecord to_record(std::string name, const SpanNoiseEstimate& estimate, std::string unit) {
  ReportRecord r{std::move(name), "span_noise", {}};
  r.add("variance", estimate.variance)
      .add("covariance", estimate.covariance)
      .add("unphysical", estimate.unphysical ? 1.0 : 0.0)
      .add("unit", std::move(unit));
  return r;
}

std::string format_record(const ReportRecord& record) {
  check_token(record.name, "name");
  check_token(record.kind, "kind");
  std::string line = fmt::format("name={} kind={}", record.name, record.kind);
  for (const auto& [key, value] : record.fields) {
    check_token(key, "key");
    if (const auto* d = std::get_if<double>(&value)) {
      line += fmt::format(" {}={}", key, format_number(*d));
    } else {
      const auto& s = std::get<std::string>(value);
      check_token(s, "value");
      line += fmt::format(" {}={}", key, s);
    }
  }
  return line;
}

ReportRecord parse_record(std::string_view line) {
  ReportRecord record;
  std::istringstream in{std::string(line)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError(fmt::format("malformed report token '{}'", token));
    std::string key = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    if (key == "name" && record.name.empty()) {
      record.name = std::move(value);
    } else if (key == "kind" && record.kind.empty()) {
      record.kind = std::move(value);
    } else if (const auto n = as_number(value)) {
      record.add(std::move(key), *n);
    } else {
      record.add(std::move(key), std::move(value));
    }
  }
  if (record.name.empty() || record.kind.empty()) {
    throw ParseError(fmt::format("report line lacks name or kind: '{}'", line));
  }
  return record;
}

void write_report(std::ostream& out, const std::vector<ReportRecord>& records) {
  out << kHeader << '\n';
  for (const auto& r : records) out << format_record(r) << '\n';
}

std::vector<ReportRecord> read_report(std::istream& in) {
  std::vector<ReportRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    out.push_back(parse_record(line));
  }
  return out;
}

void emit_report(const std::vector<ReportRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw InvalidArgument("refusing to write an empty report");
  std::ostringstream buffer;
  write_report(buffer, records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write report {}", path.string()));
  out << buffer.str();
  if (!out) throw IoError(fmt::format("failed writing report {}", path.string()));
}

std::vector<ReportRecord> load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open report {}", path.string()));
  return read_report(in);
}

void write_plot_data(const std::filesystem::path& path, const std::vector<PlotColumn>& columns) {
  if (columns.empty()) throw InvalidArgument("plot data needs at least one column");
  const std::size_t rows = columns.front().values.size();
  std::string text = "#";
  for (const auto& c : columns) {
    check_token(c.name, "column");
    if (c.values.size() != rows) {
      throw InvalidArgument(fmt::format("column '{}' has {} rows, expected {}", c.name, c.values.size(), rows));
    }
    text += ' ';
    text += c.name;
  }
  text += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j > 0) text += ' ';
      text += format_number(columns[j].values[i]);
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write plot data {}", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing plot data {}", path.string()));
}

}  // namespace fibertb
