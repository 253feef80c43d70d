#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "fibertb/errors.hpp"
#include "fibertb/protocol/session.hpp"

namespace fibertb::protocol {

namespace pt = boost::property_tree;

namespace {

constexpr double kFieldVisibility = 0.954;
constexpr double kFieldDetectorPhotons = 0.0202;
constexpr double kFieldWind = 10.0;

template <typename T>
T read(const pt::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(pt::ptree::path_type(key, '/'), fallback);
  } catch (const pt::ptree_bad_data& e) {
    throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

struct Route {
  double loss_db;
  double transit_delay;
};

// Three spans form the three-node topology (measured arm = first two);
// any other list is treated as a single chain of spans.
Route route_through(const Calibration& cal, std::span<const SpanId> ids, Band band) {
  std::vector<FiberSpan> spans;
  for (const SpanId id : ids) spans.push_back(cal.span(id));
  if (spans.size() == 3) {
    const ChannelPath path =
        make_channel_path(compose_configuration(spans, ConfigurationKind::ThreeNode), band, cal.group_index);
    return {total_loss(path, band), path.arm_delays.front()};
  }
  if (spans.empty()) throw ConfigError("channel route lists no spans");
  Route route{0.0, 0.0};
  for (const auto& s : spans) {
    route.loss_db += span_loss(s, band);
    route.transit_delay += transit_delay(s, cal.group_index);
  }
  return route;
}

std::vector<SpanId> parse_spans(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", "), boost::token_compress_on);
  std::vector<SpanId> ids;
  for (const auto& p : parts) {
    if (!p.empty()) ids.push_back(span_id_from_string(p));
  }
  return ids;
}

Band parse_band(const std::string& text) {
  if (text == "1550") return Band::Nm1550;
  if (text == "1350") return Band::Nm1350;
  throw ConfigError(fmt::format("unknown band '{}' (expected 1550 or 1350)", text));
}

}  // namespace

SessionConfig field_session_config(const Calibration& calibration) {
  SessionConfig config;
  const std::array<SpanId, 3> ids{SpanId::A, SpanId::C, SpanId::D};
  const Route route = route_through(calibration, ids, Band::Nm1350);
  config.channel.loss_db = route.loss_db;
  config.channel.transit_delay = route.transit_delay;
  config.channel.timing_jitter = 520e-12;
  config.channel.conversion_visibility = kFieldVisibility;
  config.channel.polarization = calibration.span(SpanId::A).polarization;
  config.channel.wind_mph = kFieldWind;
  config.tx.launch_mean_photon_number = launch_mean_for_detector_target(kFieldDetectorPhotons, route.loss_db);
  return config;
}

SessionConfig ideal_session_config() {
  SessionConfig config;
  config.channel = ChannelModel{};
  config.channel.timing_jitter = 0.0;
  config.rx.reference_noise = 0.0;
  config.rx.tdi_drift = 0.0;
  config.tx.launch_mean_photon_number = kFieldDetectorPhotons;
  return config;
}

SessionConfig load_session_config(const std::filesystem::path& path, const Calibration& calibration) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open session file {}", path.string()));
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.message()));
  }
  for (const auto& [name, section] : tree) {
    if (name != "session" && name != "sequence" && name != "tx" && name != "rx" && name != "channel") {
      throw ConfigError(fmt::format("{}: unknown section [{}]", path.string(), name));
    }
  }

  SessionConfig c = field_session_config(calibration);
  const pt::ptree empty;
  const auto& session = tree.get_child("session", empty);
  const auto& seq = tree.get_child("sequence", empty);
  const auto& tx = tree.get_child("tx", empty);
  const auto& rx = tree.get_child("rx", empty);
  const auto& ch = tree.get_child("channel", empty);

  c.duration = read(session, "duration_s", c.duration);

  auto& t = c.tx.timing;
  t.tdi_reference = read(seq, "tdi_reference_s", t.tdi_reference);
  t.polarization_reference = read(seq, "polarization_reference_s", t.polarization_reference);
  t.data_phase = read(seq, "data_phase_s", t.data_phase);
  t.polarization_every = read(seq, "polarization_every", t.polarization_every);
  t.qubit_period = read(seq, "qubit_period_us", t.qubit_period * 1e6) * 1e-6;
  t.settle = read(seq, "settle_us", t.settle * 1e6) * 1e-6;

  if (const auto spans = ch.get_optional<std::string>("spans")) {
    const auto band = parse_band(read<std::string>(ch, "band", "1350"));
    const auto ids = parse_spans(*spans);
    const Route route = route_through(calibration, ids, band);
    c.channel.loss_db = route.loss_db;
    c.channel.transit_delay = route.transit_delay;
  }
  c.channel.loss_db = read(ch, "loss_db", c.channel.loss_db);
  c.channel.transit_delay = read(ch, "transit_delay_us", c.channel.transit_delay * 1e6) * 1e-6;
  c.channel.timing_jitter = read(ch, "timing_jitter_ps", c.channel.timing_jitter * 1e12) * 1e-12;
  c.channel.conversion_visibility = read(ch, "conversion_visibility", c.channel.conversion_visibility);
  c.channel.polarization.kappa = read(ch, "pol_kappa", c.channel.polarization.kappa);
  c.channel.polarization.n_exponent = read(ch, "pol_n", c.channel.polarization.n_exponent);
  c.channel.wind_mph = read(ch, "wind_mph", c.channel.wind_mph);
  c.channel.polarization_step = read(ch, "polarization_step_s", c.channel.polarization_step);
  c.channel.drop_every_nth_clock_pulse = read(ch, "drop_every_nth_clock_pulse", c.channel.drop_every_nth_clock_pulse);
  c.channel.clock_pulse_loss_probability =
      read(ch, "clock_pulse_loss_probability", c.channel.clock_pulse_loss_probability);

  c.tx.codebook_words = read(tx, "codebook_words", c.tx.codebook_words);
  c.tx.word_length = read(tx, "word_length", c.tx.word_length);
  c.tx.random_bits = read(tx, "random_bits", c.tx.random_bits);
  if (tx.get_optional<std::string>("launch_mean_photon_number")) {
    c.tx.launch_mean_photon_number = read(tx, "launch_mean_photon_number", 0.0);
  } else {
    const double target = read(tx, "mean_photon_number_at_detector", kFieldDetectorPhotons);
    c.tx.launch_mean_photon_number = launch_mean_for_detector_target(target, c.channel.loss_db);
  }

  auto& r = c.rx;
  r.gains.kp = read(rx, "lock_kp", r.gains.kp);
  r.gains.ki = read(rx, "lock_ki", r.gains.ki);
  r.gains.lost_error = read(rx, "lock_lost_error", r.gains.lost_error);
  r.gains.lost_dwell_steps = read(rx, "lock_lost_dwell_steps", r.gains.lost_dwell_steps);
  r.lock_rate = read(rx, "lock_rate_hz", r.lock_rate);
  r.reference_noise = read(rx, "reference_noise", r.reference_noise);
  r.tdi_visibility = read(rx, "tdi_visibility", r.tdi_visibility);
  r.tdi_wavelength = read(rx, "tdi_wavelength_nm", r.tdi_wavelength * 1e9) * 1e-9;
  r.tdi_drift = read(rx, "tdi_drift_nm_per_sqrt_s", r.tdi_drift * 1e9) * 1e-9;
  r.visibility_ramp = read(rx, "visibility_ramp_per_s", r.visibility_ramp);
  r.polarization_update_rate = read(rx, "polarization_update_rate_hz", r.polarization_update_rate);
  r.polarization_max_step = read(rx, "polarization_max_step_rad", r.polarization_max_step);
  r.polarization_tolerance =
      read(rx, "polarization_tolerance_deg", r.polarization_tolerance * 180.0 / constants::kPi) * constants::kPi / 180.0;
  r.max_decode_failure_fraction = read(rx, "max_decode_failure_fraction", r.max_decode_failure_fraction);

  if (!(c.duration > 0.0)) throw ConfigError("session duration must be positive");
  if (!(c.channel.loss_db >= 0.0)) throw ConfigError("channel loss must be non-negative");
  if (!(r.tdi_visibility >= 0.0 && r.tdi_visibility <= 1.0)) throw ConfigError("tdi visibility must lie in [0, 1]");
  validate(c.channel.polarization);
  return c;
}

}  // namespace fibertb::protocol
