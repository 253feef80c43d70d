#include "fibertb/environment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>
#include <fmt/format.h>

#include "fibertb/errors.hpp"
#include "fibertb/estimation.hpp"

namespace fibertb {

namespace {

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<int> parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) return std::nullopt;
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
    value = value * 10 + (text[i] - '0');
  }
  return value;
}

struct UnitReading {
  Unit unit;
  double scale;
  double offset;
};

std::optional<UnitReading> read_unit(std::string_view text) {
  std::string u(text);
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (u == "mph") return UnitReading{Unit::Mph, 1.0, 0.0};
  if (u == "m/s" || u == "mps") return UnitReading{Unit::Mph, 3600.0 / 1609.344, 0.0};
  if (u == "c" || u == "degc" || u == "celsius" || u == "\xc2\xb0" "c") return UnitReading{Unit::Celsius, 1.0, 0.0};
  if (u == "f" || u == "degf" || u == "fahrenheit" || u == "\xc2\xb0" "f") {
    return UnitReading{Unit::Celsius, 5.0 / 9.0, -32.0 * 5.0 / 9.0};
  }
  return std::nullopt;
}

std::string_view unit_label(Unit unit) { return unit == Unit::Celsius ? "C" : "mph"; }

std::vector<std::string> split_csv(const std::string& line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<std::string> out;
  for (auto field : Tokenizer(line)) {
    boost::algorithm::trim(field);
    out.push_back(std::move(field));
  }
  return out;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::filesystem::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(fmt::format("{}: missing column '{}'", path.string(), name));
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

void validate(const EnvironmentSeries& series) {
  if (series.values.empty()) throw EmptySeries(fmt::format("series '{}' has no samples", series.label));
  if (series.timestamps.size() != series.values.size()) {
    throw ParseError(fmt::format("series '{}': {} timestamps for {} values", series.label,
                                 series.timestamps.size(), series.values.size()));
  }
  for (std::size_t i = 1; i < series.timestamps.size(); ++i) {
    if (!(series.timestamps[i] > series.timestamps[i - 1])) {
      throw ParseError(fmt::format("series '{}': timestamps not strictly increasing at row {}", series.label, i));
    }
  }
  if (series.unit != Unit::Mph && series.unit != Unit::Celsius) {
    throw ParseError(fmt::format("series '{}': unsupported unit {}", series.label, to_string(series.unit)));
  }
}

std::optional<double> parse_timestamp(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (const auto n = parse_number(text)) return n;

  // YYYY-MM-DD[Thh:mm[:ss[.fff]]][Z|+hh:mm|-hh:mm]
  const auto year = parse_digits(text, 0, 4);
  const auto month = parse_digits(text, 5, 2);
  const auto day = parse_digits(text, 8, 2);
  if (!year || !month || !day || text[4] != '-' || text[7] != '-') return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*year}, std::chrono::month{static_cast<unsigned>(*month)},
                                        std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok()) return std::nullopt;
  double seconds = static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count()) * 86400.0;

  std::size_t pos = 10;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    const auto hh = parse_digits(text, pos + 1, 2);
    const auto mm = parse_digits(text, pos + 4, 2);
    if (!hh || !mm || text[pos + 3] != ':' || *hh > 23 || *mm > 59) return std::nullopt;
    seconds += *hh * 3600.0 + *mm * 60.0;
    pos += 6;
    if (pos < text.size() && text[pos] == ':') {
      const auto ss = parse_digits(text, pos + 1, 2);
      if (!ss || *ss > 60) return std::nullopt;
      pos += 3;
      double fraction = 0.0;
      if (pos < text.size() && text[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < text.size() && text[end] >= '0' && text[end] <= '9') ++end;
        if (end == pos + 1) return std::nullopt;
        fraction = *parse_number(text.substr(pos, end - pos));
        pos = end;
      }
      seconds += *ss + fraction;
    }
  }
  if (pos == text.size()) return seconds;
  if (text[pos] == 'Z' && pos + 1 == text.size()) return seconds;
  if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
    const auto oh = parse_digits(text, pos + 1, 2);
    const auto om = parse_digits(text, pos + 4, 2);
    if (!oh || !om) return std::nullopt;
    const double offset = *oh * 3600.0 + *om * 60.0;
    return text[pos] == '+' ? seconds - offset : seconds + offset;
  }
  return std::nullopt;
}

std::string format_timestamp(double seconds) {
  const double whole = std::floor(seconds);
  const auto days = static_cast<long>(std::floor(whole / 86400.0));
  const auto in_day = static_cast<long>(whole - static_cast<double>(days) * 86400.0);
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  std::string out = fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}", static_cast<int>(ymd.year()),
                                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                                in_day / 3600, (in_day / 60) % 60, in_day % 60);
  const double fraction = seconds - whole;
  if (fraction > 0.0) {
    std::string digits = fmt::format("{:.9f}", fraction);
    while (digits.back() == '0') digits.pop_back();
    if (digits.size() > 2) out += digits.substr(1);
  }
  return out + "Z";
}

CsvParseResult parse_weather_csv(const std::filesystem::path& path, const ColumnMapping& columns) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open weather file {}", path.string()));

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.rfind("\xef\xbb\xbf", 0) == 0) line.erase(0, 3);
    boost::algorithm::trim(line);
    if (line.empty() || line.front() == '#') continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw ParseError(fmt::format("{}: no header row", path.string()));
  const std::size_t it = column_index(header, columns.timestamp, path);
  const std::size_t iv = column_index(header, columns.value, path);
  const std::size_t iu = column_index(header, columns.unit, path);
  const std::size_t needed = std::max({it, iv, iu}) + 1;

  CsvParseResult result;
  std::optional<Unit> series_unit;
  std::map<double, std::pair<double, std::size_t>> samples;
  while (std::getline(in, line)) {
    boost::algorithm::trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv(line);
    } catch (const boost::escaped_list_error&) {
      ++result.skipped_rows;
      continue;
    }
    if (fields.size() < needed) {
      ++result.skipped_rows;
      continue;
    }
    const auto t = parse_timestamp(fields[it]);
    const auto v = parse_number(fields[iv]);
    const auto u = read_unit(fields[iu]);
    if (!t || !v || !u || (series_unit && *series_unit != u->unit)) {
      ++result.skipped_rows;
      continue;
    }
    series_unit = u->unit;
    auto& slot = samples[*t];
    slot.first += *v * u->scale + u->offset;
    slot.second += 1;
  }

  result.series.unit = series_unit.value_or(Unit::Mph);
  result.series.label = path.stem().string();
  for (const auto& [t, acc] : samples) {
    result.series.timestamps.push_back(t);
    result.series.values.push_back(acc.first / static_cast<double>(acc.second));
    result.merged_duplicates += acc.second - 1;
  }
  validate(result.series);
  return result;
}

void write_weather_csv(const EnvironmentSeries& series, const std::filesystem::path& path) {
  validate(series);
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write weather file {}", path.string()));
  out << "timestamp,value,unit\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series.timestamps[i];
    // Whole seconds read naturally as ISO dates; anything finer keeps full precision as a number.
    const std::string stamp = t == std::floor(t) ? format_timestamp(t) : fmt::format("{:.17g}", t);
    out << stamp << ',' << fmt::format("{:.17g}", series.values[i]) << ',' << unit_label(series.unit) << '\n';
  }
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

SampledTrace align_to(const EnvironmentSeries& series, const TimeGrid& grid) {
  validate(series);
  std::vector<double> times(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) times[i] = grid.time(i);
  return SampledTrace(grid.t0, grid.dt, interpolate_linear(series.timestamps, series.values, times), series.unit);
}

SampledTrace align_to(const EnvironmentSeries& series, const SampledTrace& trace) {
  return align_to(series, trace.grid());
}

EnvironmentSeries synthetic_weather(const SyntheticWeather& shape, Unit unit, double t0, double duration,
                                    double dt, RandomSeed seed, std::string label) {
  if (!(dt > 0.0)) throw InvalidRate(fmt::format("sample period must be positive, got {}", dt));
  if (!(duration >= 0.0)) throw InvalidArgument("duration must be non-negative");
  if (!(shape.noise_correlation_time > 0.0)) throw InvalidArgument("correlation time must be positive");
  const auto n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  const double decay = std::exp(-dt / shape.noise_correlation_time);
  const double kick = shape.noise_sigma * std::sqrt(1.0 - decay * decay);
  constexpr double kDay = 86400.0;

  Rng rng(seed, streams::kWeather);
  EnvironmentSeries out;
  out.unit = unit;
  out.label = std::move(label);
  out.timestamps.reserve(n);
  out.values.reserve(n);
  double wander = shape.noise_sigma * rng.normal();
  for (std::size_t k = 0; k < n; ++k) {
    const double elapsed = static_cast<double>(k) * dt;
    const double diurnal = shape.diurnal_amplitude * std::sin(constants::kTwoPi * elapsed / kDay + shape.diurnal_phase);
    out.timestamps.push_back(t0 + elapsed);
    out.values.push_back(std::clamp(shape.mean + diurnal + wander, shape.min_value, shape.max_value));
    wander = decay * wander + kick * rng.normal();
  }
  return out;
}

}  // namespace fibertb
