#include "fibertb/calibration.hpp"

#include <cmath>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb {

namespace pt = boost::property_tree;

namespace {

constexpr double kLongSpanKm = 42.5;
constexpr double kShortSpanKm = 7.9;
constexpr double kDelayTrim = 54.2e-9;

FiberSpan make_span(SpanId id, double length_km, double loss_1550, double loss_1350, double trim_s) {
  FiberSpan span;
  span.id = id;
  span.length_km = length_km;
  span.loss_db = {{Band::Nm1550, loss_1550}, {Band::Nm1350, loss_1350}};
  span.delay_trim_s = trim_s;
  // The short spans were never characterized on their own: the walk's step
  // variance is taken to grow with length, so kappa scales as sqrt(L).
  span.polarization.kappa *= std::sqrt(length_km / kLongSpanKm);
  return span;
}

std::string section_name(SpanId id) { return std::string(to_string(id)); }

template <typename T>
T read(const pt::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const pt::ptree_bad_data& e) {
    throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

void read_span(const pt::ptree& section, FiberSpan& span) {
  span.length_km = read(section, "length_km", span.length_km);
  for (const auto& [band, key] : {std::pair{Band::Nm1550, "loss_1550_db"}, std::pair{Band::Nm1350, "loss_1350_db"}}) {
    if (section.get_optional<std::string>(key)) span.loss_db[band] = read(section, key, 0.0);
  }
  span.delay_trim_s = read(section, "delay_trim_ns", span.delay_trim_s * 1e9) * 1e-9;
  span.phase.v_hz2_per_m = read(section, "phase_v_hz2_per_m", span.phase.v_hz2_per_m);
  span.phase.covariance_fraction = read(section, "phase_covariance_fraction", span.phase.covariance_fraction);
  span.phase.calibration_dt = 1.0 / read(section, "phase_calibration_rate_hz", 1.0 / span.phase.calibration_dt);
  span.polarization.kappa = read(section, "pol_kappa", span.polarization.kappa);
  span.polarization.n_exponent = read(section, "pol_n", span.polarization.n_exponent);
  span.thermal.alpha_length = read(section, "thermal_alpha_length", span.thermal.alpha_length);
  span.thermal.alpha_index = read(section, "thermal_alpha_index", span.thermal.alpha_index);
}

void validate_calibration(const Calibration& cal) {
  if (!(cal.group_index > 1.0)) throw ConfigError(fmt::format("group index {} must exceed 1", cal.group_index));
  if (!(cal.tau0_round_trip_s > 0.0) || !(cal.tau0_one_way_sum_s > 0.0)) {
    throw ConfigError("thermal reference delays must be positive");
  }
  if (!(cal.differential_mismatch >= 0.0)) throw ConfigError("differential mismatch must be non-negative");
  for (const auto& [id, span] : cal.spans) {
    validate(span);
    validate(span.phase);
    validate(span.polarization);
    validate(span.thermal);
  }
  validate(cal.round_trip_polarization);
}

}  // namespace

const FiberSpan& Calibration::span(SpanId id) const {
  const auto it = spans.find(id);
  if (it == spans.end()) throw MissingCalibration(fmt::format("no calibration for span {}", to_string(id)));
  return it->second;
}

Calibration default_calibration() {
  Calibration cal;
  cal.spans[SpanId::A] = make_span(SpanId::A, kLongSpanKm, 11.9, 16.6, +kDelayTrim);
  cal.spans[SpanId::B] = make_span(SpanId::B, kLongSpanKm, 17.0, 21.9, -kDelayTrim);
  cal.spans[SpanId::C] = make_span(SpanId::C, kShortSpanKm, 10.4, 11.2, 0.0);
  cal.spans[SpanId::D] = make_span(SpanId::D, kShortSpanKm, 6.2, 7.4, 0.0);
  return cal;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open calibration file {}", path.string()));
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.message()));
  }

  Calibration cal = default_calibration();
  for (const auto& [name, section] : tree) {
    if (name == "network") {
      cal.group_index = read(section, "group_index", cal.group_index);
      cal.differential_mismatch = read(section, "differential_mismatch", cal.differential_mismatch);
    } else if (name == "thermal") {
      cal.tau0_round_trip_s = read(section, "tau0_round_trip_us", cal.tau0_round_trip_s * 1e6) * 1e-6;
      cal.tau0_one_way_sum_s = read(section, "tau0_one_way_sum_us", cal.tau0_one_way_sum_s * 1e6) * 1e-6;
    } else if (name == "round_trip") {
      cal.round_trip_polarization.kappa = read(section, "pol_kappa", cal.round_trip_polarization.kappa);
      cal.round_trip_polarization.n_exponent = read(section, "pol_n", cal.round_trip_polarization.n_exponent);
    } else if (name == "A" || name == "B" || name == "C" || name == "D") {
      read_span(section, cal.spans[span_id_from_string(name)]);
    } else {
      throw ConfigError(fmt::format("{}: unknown section [{}]", path.string(), name));
    }
  }
  validate_calibration(cal);
  return cal;
}

void save_calibration(const Calibration& cal, const std::filesystem::path& path) {
  pt::ptree tree;
  tree.put("network.group_index", cal.group_index);
  tree.put("network.differential_mismatch", cal.differential_mismatch);
  tree.put("thermal.tau0_round_trip_us", cal.tau0_round_trip_s * 1e6);
  tree.put("thermal.tau0_one_way_sum_us", cal.tau0_one_way_sum_s * 1e6);
  tree.put("round_trip.pol_kappa", cal.round_trip_polarization.kappa);
  tree.put("round_trip.pol_n", cal.round_trip_polarization.n_exponent);
  for (const auto& [id, span] : cal.spans) {
    pt::ptree s;
    s.put("length_km", span.length_km);
    if (const auto it = span.loss_db.find(Band::Nm1550); it != span.loss_db.end()) s.put("loss_1550_db", it->second);
    if (const auto it = span.loss_db.find(Band::Nm1350); it != span.loss_db.end()) s.put("loss_1350_db", it->second);
    s.put("delay_trim_ns", span.delay_trim_s * 1e9);
    s.put("phase_v_hz2_per_m", span.phase.v_hz2_per_m);
    s.put("phase_covariance_fraction", span.phase.covariance_fraction);
    s.put("phase_calibration_rate_hz", 1.0 / span.phase.calibration_dt);
    s.put("pol_kappa", span.polarization.kappa);
    s.put("pol_n", span.polarization.n_exponent);
    s.put("thermal_alpha_length", span.thermal.alpha_length);
    s.put("thermal_alpha_index", span.thermal.alpha_index);
    tree.add_child(pt::ptree::path_type(section_name(id), '\0'), s);
  }
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write calibration file {}", path.string()));
  try {
    pt::write_ini(out, tree);
  } catch (const pt::ini_parser_error& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.message()));
  }
}

}  // namespace fibertb
