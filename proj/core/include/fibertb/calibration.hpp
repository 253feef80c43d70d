#pragma once

#include <filesystem>
#include <map>

#include "fibertb/fiber.hpp"

namespace fibertb {

/// Everything the span calibration file carries.
struct Calibration {
  double group_index = kCalibratedGroupIndex;
  std::map<SpanId, FiberSpan> spans;
  /// Composed two-way drift statistics, fitted directly rather than built
  /// from two one-way walks.
  PolarizationDriftParams round_trip_polarization = PolarizationDriftParams::round_trip();
  /// Thermal reference delays: measured round trip, and the one-way sum
  /// convention used for the 3.6 ns/C prediction.
  double tau0_round_trip_s = 415.045e-6;
  double tau0_one_way_sum_s = 425.45e-6;
  /// Fractional +/- thermal coupling mismatch between copropagating spans.
  double differential_mismatch = 0.01;

  const FiberSpan& span(SpanId id) const;
};

/// Built-in defaults matching the shipped data/spans.ini.
Calibration default_calibration();

/// Reads an INI calibration file. Missing keys fall back to the built-in
/// defaults; a malformed file raises ConfigError, an unreadable one IoError.
Calibration load_calibration(const std::filesystem::path& path);

void save_calibration(const Calibration& calibration, const std::filesystem::path& path);

}  // namespace fibertb
