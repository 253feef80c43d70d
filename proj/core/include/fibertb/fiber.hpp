#pragma once

#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "fibertb/noise_params.hpp"
#include "fibertb/units.hpp"

namespace fibertb {

enum class SpanId { A, B, C, D };
enum class Site { Lincoln, Mit, Harvard };
enum class Direction { Forward, Reverse };
enum class ConfigurationKind { Differential, RoundTrip, ThreeNode };

std::string_view to_string(SpanId id);
std::string_view to_string(Site site);
std::string_view to_string(ConfigurationKind kind);
SpanId span_id_from_string(std::string_view text);
ConfigurationKind configuration_kind_from_string(std::string_view text);

/// Group index that maps the 85 km round trip onto its measured 415.045 us.
inline constexpr double kCalibratedGroupIndex = 415.045e-6 * constants::kSpeedOfLight / 85e3;

struct SpanEndpoints {
  Site forward_from;
  Site forward_to;
};

/// A and B join Lincoln to MIT; C and D join MIT to Harvard.
SpanEndpoints endpoints(SpanId id);

struct FiberSpan {
  SpanId id = SpanId::A;
  double length_km = 0.0;
  std::map<Band, double> loss_db;
  PhaseNoiseParams phase;
  PolarizationDriftParams polarization;
  ThermalDelayParams thermal;
  /// Measured transit-time deviation from length x group index / c.
  double delay_trim_s = 0.0;

  double length_m() const { return length_km * 1e3; }
};

/// Throws ConfigError unless length > 0 and every loss entry is >= 0.
void validate(const FiberSpan& span);

struct SpanLeg {
  FiberSpan span;
  Direction direction = Direction::Forward;
};

/// One signal path. An arm with no legs is the short local reference.
struct Arm {
  std::vector<SpanLeg> legs;

  bool is_reference() const { return legs.empty(); }
  double length_km() const;
  Site origin() const;
  Site destination() const;
};

struct NetworkConfiguration {
  ConfigurationKind kind = ConfigurationKind::Differential;
  std::vector<Arm> arms;

  const Arm& measured_arm() const { return arms.front(); }
};

/// Arranges spans into one of the three testbed topologies.
///
/// Differential: two copropagating spans, one arm each.
/// RoundTrip: two spans sharing both endpoints; out along the first, back
///   along the second, compared against a zero-length reference arm.
/// ThreeNode: a Lincoln-MIT span followed by a MIT-Harvard span, plus a
///   second MIT-Harvard span; both arms end at Harvard.
///
/// Throws IncompatibleSpans when the spans do not chain for `kind`.
NetworkConfiguration compose_configuration(std::span<const FiberSpan> spans, ConfigurationKind kind);

/// Propagation delay of `length_m` of fibre at `group_index`.
double nominal_delay_for_length(double length_m, double group_index = kCalibratedGroupIndex);

/// length x group_index / c. Requires group_index > 1.
double nominal_delay(const FiberSpan& span, double group_index = kCalibratedGroupIndex);

/// nominal_delay plus the span's calibrated trim.
double transit_delay(const FiberSpan& span, double group_index = kCalibratedGroupIndex);

double span_loss(const FiberSpan& span, Band band);

struct ChannelPath {
  NetworkConfiguration config;
  Band wavelength = Band::Nm1550;
  std::vector<double> arm_delays;  // seconds, one per arm

  /// Delay of the measured arm minus the second arm.
  double differential_delay() const;
};

ChannelPath make_channel_path(NetworkConfiguration config, Band wavelength,
                              double group_index = kCalibratedGroupIndex);

double arm_loss(const Arm& arm, Band band);

/// Sum of span losses along the measured arm. Throws MissingCalibration
/// when a span has no entry for `band`.
double total_loss(const ChannelPath& path, Band band);

}  // namespace fibertb
