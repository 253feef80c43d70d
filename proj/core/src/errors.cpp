#include "fibertb/errors.hpp"
#include "fibertb/units.hpp"

namespace fibertb {

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::Radians: return "rad";
    case Unit::Hertz: return "Hz";
    case Unit::Seconds: return "s";
    case Unit::Stokes: return "stokes";
    case Unit::Celsius: return "degC";
    case Unit::Mph: return "mph";
    case Unit::RadiansPerSecond: return "rad/s";
    case Unit::Intensity: return "1/s";
    case Unit::Dimensionless: return "1";
  }
  return "?";
}

std::string_view to_string(Band band) {
  switch (band) {
    case Band::Nm1550: return "1550nm";
    case Band::Nm1350: return "1350nm";
  }
  return "?";
}

}  // namespace fibertb
