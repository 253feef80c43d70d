#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fibertb/random.hpp"
#include "fibertb/trace.hpp"

namespace fibertb {

/// Irregularly sampled weather record (wind in mph or temperature in C).
/// Timestamps are UTC seconds since the Unix epoch, strictly increasing.
struct EnvironmentSeries {
  std::vector<double> timestamps;
  std::vector<double> values;
  Unit unit = Unit::Mph;
  std::string label;

  std::size_t size() const { return values.size(); }
};

/// Throws ParseError unless sizes agree, timestamps strictly increase and
/// the unit is Mph or Celsius; EmptySeries when there are no samples.
void validate(const EnvironmentSeries& series);

struct ColumnMapping {
  std::string timestamp = "timestamp";
  std::string value = "value";
  std::string unit = "unit";
};

struct CsvParseResult {
  EnvironmentSeries series;
  std::size_t skipped_rows = 0;
  std::size_t merged_duplicates = 0;
};

/// Parses an ISO-8601 UTC timestamp ("2023-02-22T13:36:00Z", optional
/// fraction and +hh:mm offset) or a bare number of seconds.
std::optional<double> parse_timestamp(std::string_view text);
std::string format_timestamp(double seconds);

/// Reads a CSV with a header row. Rows with unparsable timestamps, values or
/// units are skipped and counted; duplicate timestamps are merged by mean.
/// m/s and F are converted to mph and C.
CsvParseResult parse_weather_csv(const std::filesystem::path& path, const ColumnMapping& columns = {});

void write_weather_csv(const EnvironmentSeries& series, const std::filesystem::path& path);

/// Interpolates the series onto the trace's sampling grid.
SampledTrace align_to(const EnvironmentSeries& series, const TimeGrid& grid);
SampledTrace align_to(const EnvironmentSeries& series, const SampledTrace& trace);

struct SyntheticWeather {
  double mean = 11.0;
  double diurnal_amplitude = 7.0;
  double diurnal_phase = 0.0;  // radians
  double noise_sigma = 1.5;
  double noise_correlation_time = 3600.0;  // s
  double min_value = 2.0;
  double max_value = 20.0;
};

/// Diurnal sinusoid plus an Ornstein-Uhlenbeck wander, clipped to
/// [min_value, max_value]. Stands in for recorded weather in tests and demos.
EnvironmentSeries synthetic_weather(const SyntheticWeather& shape, Unit unit, double t0, double duration,
                                    double dt, RandomSeed seed, std::string label = "synthetic");

}  // namespace fibertb
