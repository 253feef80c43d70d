#pragma once

#include <numbers>
#include <string_view>

namespace fibertb {

/// Unit tag carried by every trace. Operations check it on entry.
enum class Unit {
  Radians,
  Hertz,
  Seconds,
  Stokes,  // dimensionless unit-norm triple
  Celsius,
  Mph,
  RadiansPerSecond,
  Intensity,  // normalized intensity, 1/s
  Dimensionless,
};

std::string_view to_string(Unit unit);

/// Wavelength bands tabulated in the span calibration.
enum class Band { Nm1550, Nm1350 };

std::string_view to_string(Band band);

namespace constants {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace constants

}  // namespace fibertb
