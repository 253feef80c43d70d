#include "fibertb_cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "fibertb/calibration.hpp"
#include "fibertb/environment.hpp"
#include "fibertb/errors.hpp"
#include "fibertb/estimation.hpp"
#include "fibertb/noise.hpp"
#include "fibertb/protocol/qubit.hpp"
#include "fibertb/protocol/session.hpp"
#include "fibertb/spectral.hpp"

namespace fibertb::cli {

namespace pt = boost::property_tree;

namespace {

constexpr double kDefaultPhaseDuration = 60.0;
constexpr double kDefaultDay = 86400.0;
constexpr double kDefaultSessionDuration = 336.0;

constexpr std::size_t kPhaseSegment = 1 << 14;
constexpr double kPhaseSlopeLow = 100.0;
constexpr double kPhaseSlopeHigh = 1000.0;
constexpr double kStabilizerRate = 2e6;
constexpr double kStabilizerDuration = 0.05;

constexpr double kPolarizationDt = 1.0;
constexpr double kRollingWindow = 600.0;
constexpr std::size_t kPolarizationSegment = 4096;
constexpr double kPolarizationSlopeLow = 0.02;
constexpr double kPolarizationSlopeHigh = 0.2;
constexpr double kSpectrogramWindow = 600.0;

constexpr double kDelayDt = 60.0;
constexpr std::uint64_t kRoundTripWalkTag = 0x52545249505741ULL;

ReportRecord scenario_record(const Scenario& s, double duration) {
  ReportRecord r{"scenario", "scenario", {}};
  r.add("pipeline", std::string(to_string(s.pipeline)))
      .add("seed", fmt::format("{}", s.seed))
      .add("duration_s", duration);
  if (s.configuration) r.add("configuration", std::string(fibertb::to_string(*s.configuration)));
  return r;
}

Calibration calibration_for(const Scenario& s) {
  return s.calibration ? load_calibration(*s.calibration) : default_calibration();
}

bool wants(const Scenario& s, ConfigurationKind kind) { return !s.configuration || *s.configuration == kind; }

void require_supported(const Scenario& s) {
  if (s.configuration == ConfigurationKind::ThreeNode) {
    throw ConfigError(fmt::format("{} supports the differential and round-trip configurations only",
                                  to_string(s.pipeline)));
  }
}

std::vector<double> histogram_density(std::span<const double> x, double lo, double hi, std::size_t bins) {
  std::vector<double> h(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (const double v : x) {
    const double u = (v - lo) / width;
    if (u >= 0.0 && u < static_cast<double>(bins)) h[static_cast<std::size_t>(u)] += 1.0;
  }
  for (auto& c : h) c /= static_cast<double>(x.size()) * width;
  return h;
}

SampledTrace combine(const SampledTrace& a, const SampledTrace& b, double sign) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + sign * b[i];
  return SampledTrace(a.t0(), a.dt(), std::move(out), a.unit());
}

ReportRecord slope_record(std::string name, double slope, double f_lo, double f_hi, std::size_t segment) {
  ReportRecord r{std::move(name), "psd_slope", {}};
  r.add("slope_db_per_decade", slope)
      .add("f_lo_hz", f_lo)
      .add("f_hi_hz", f_hi)
      .add("segment_length", static_cast<double>(segment));
  return r;
}

// ------------------------------------------------------------------- phase

ScenarioResult characterize_phase(const Scenario& s) {
  require_supported(s);
  const Calibration cal = calibration_for(s);
  const FiberSpan& a = cal.span(SpanId::A);
  const FiberSpan& b = cal.span(SpanId::B);
  if (std::abs(a.length_km - b.length_km) > 1e-9) {
    throw ConfigError("phase characterization needs equal-length copropagating spans A and B");
  }
  const double duration = s.duration.value_or(kDefaultPhaseDuration);
  const double dt = a.phase.calibration_dt;
  const FrequencyPair pair = simulate_frequency_pair(a.phase, a.length_m(), duration, dt, RandomSeed{s.seed});

  ScenarioResult out;
  out.records.push_back(scenario_record(s, duration));

  struct Arm {
    ConfigurationKind kind;
    std::string name;
    std::string column;
    double sign;
  };
  const std::vector<Arm> arms{{ConfigurationKind::Differential, "phase_differential", "differential", -1.0},
                              {ConfigurationKind::RoundTrip, "phase_round_trip", "round_trip", +1.0}};

  std::vector<PlotColumn> psd_columns;
  std::vector<PlotColumn> hist_columns;
  std::vector<double> variances;
  const double spread = 5.0 * std::sqrt(2.0 * 2.0 * frequency_variance(a.phase, a.length_m(), dt));
  constexpr std::size_t kBins = 101;
  for (const auto& arm : arms) {
    if (!wants(s, arm.kind)) continue;
    const SampledTrace phase = integrate_phase(combine(pair.a, pair.b, arm.sign));
    const SampledTrace frequency = differentiate_phase(phase);
    const GaussianFit fit = fit_gaussian_variance(frequency.values());
    variances.push_back(fit.variance);
    out.records.push_back(to_record(arm.name, fit, "Hz^2"));

    const std::size_t segment = std::min(kPhaseSegment, phase.size());
    const SpectrumEstimate psd = welch_psd(phase, segment);
    out.records.push_back(slope_record(arm.name + "_psd", psd_slope(psd, kPhaseSlopeLow, kPhaseSlopeHigh),
                                       kPhaseSlopeLow, kPhaseSlopeHigh, segment));
    if (psd_columns.empty()) psd_columns.push_back({"frequency_hz", psd.frequencies});
    psd_columns.push_back({"psd_" + arm.column + "_rad2_per_hz", psd.power});
    hist_columns.push_back({"density_" + arm.column + "_per_hz", histogram_density(frequency.values(), -spread, spread, kBins)});
  }
  if (variances.size() == 2) {
    out.records.push_back(to_record("span_noise", span_variance_covariance(variances[0], variances[1]), "Hz^2"));
  }

  // Residual of the stabilization loop on a short, finely sampled round trip.
  PhaseNoiseParams fine = a.phase;
  const FrequencyPair fast = simulate_frequency_pair(fine, a.length_m(), kStabilizerDuration, 1.0 / kStabilizerRate,
                                                     RandomSeed{s.seed});
  const SampledTrace loop_input = integrate_phase(combine(fast.a, fast.b, +1.0));
  const PhaseStabilizerParams loop;
  const SampledTrace residual = stabilize_phase(loop_input, loop);
  const GaussianFit residual_fit = fit_gaussian_variance(residual.values());
  ReportRecord stab{"phase_stabilizer_residual", "stabilizer", {}};
  stab.add("rms_rad", std::sqrt(residual_fit.variance + residual_fit.mean * residual_fit.mean))
      .add("bandwidth_hz", loop.bandwidth_3db)
      .add("sample_rate_hz", kStabilizerRate);
  out.records.push_back(std::move(stab));

  std::vector<double> centers(kBins);
  for (std::size_t i = 0; i < kBins; ++i) {
    centers[i] = -spread + (static_cast<double>(i) + 0.5) * 2.0 * spread / static_cast<double>(kBins);
  }
  hist_columns.insert(hist_columns.begin(), PlotColumn{"frequency_hz", std::move(centers)});
  out.plots.push_back({"phase_frequency_histogram", std::move(hist_columns)});
  out.plots.push_back({"phase_psd", std::move(psd_columns)});
  return out;
}

// ------------------------------------------------------------ polarization

SampledTrace wind_on_grid(const Scenario& s, double duration, double dt) {
  if (s.wind) {
    const CsvParseResult parsed = parse_weather_csv(*s.wind);
    require_unit(parsed.series.unit, Unit::Mph, "wind file");
    const auto& ts = parsed.series.timestamps;
    const double span = std::min(duration, ts.back() - ts.front());
    if (!(span >= dt)) throw ConfigError(fmt::format("wind file {} covers less than one step", s.wind->string()));
    const auto n = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;
    const SampledTrace absolute = align_to(parsed.series, TimeGrid{ts.front(), dt, n});
    return SampledTrace(0.0, dt, std::vector<double>(absolute.values().begin(), absolute.values().end()), Unit::Mph);
  }
  const EnvironmentSeries synthetic =
      synthetic_weather(SyntheticWeather{}, Unit::Mph, 0.0, duration, kDelayDt, RandomSeed{s.seed});
  const auto n = static_cast<std::size_t>(std::floor(synthetic.timestamps.back() / dt + 1e-9)) + 1;
  return align_to(synthetic, TimeGrid{0.0, dt, n});
}

std::vector<double> scaled(std::span<const double> v, double factor) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [factor](double x) { return x * factor; });
  return out;
}

SampledTrace stokes_component(const StokesTrace& trace, int index) {
  std::vector<double> out(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) out[i] = trace[i][index];
  return SampledTrace(trace.t0(), trace.dt(), std::move(out), Unit::Dimensionless);
}

ScenarioResult characterize_polarization(const Scenario& s) {
  require_supported(s);
  const Calibration cal = calibration_for(s);
  const SampledTrace wind = wind_on_grid(s, s.duration.value_or(kDefaultDay), kPolarizationDt);
  const double duration = wind.end_time() - wind.t0();

  ScenarioResult out;
  out.records.push_back(scenario_record(s, duration));

  struct Walk {
    ConfigurationKind kind;
    std::string name;
    std::string column;
    PolarizationDriftParams params;
    RandomSeed seed;
  };
  const std::vector<Walk> walks{
      {ConfigurationKind::Differential, "polarization_one_way", "one_way", cal.span(SpanId::A).polarization,
       RandomSeed{s.seed}},
      {ConfigurationKind::RoundTrip, "polarization_round_trip", "round_trip", cal.round_trip_polarization,
       RandomSeed{mix64(s.seed ^ kRoundTripWalkTag)}}};

  std::vector<PlotColumn> drift_columns;
  std::vector<PlotColumn> spectro_columns;
  for (const auto& walk : walks) {
    if (!wants(s, walk.kind)) continue;
    const StokesTrace stokes = simulate_polarization_walk(walk.params, wind, kPolarizationDt, Stokes::UnitX(), walk.seed);
    const SampledTrace rate = polarization_drift_rate(stokes);
    const SampledTrace rolling = rolling_mean(rate, kRollingWindow);
    const SampledTrace wind_trace = resample_linear(wind, rate.grid());
    const std::vector<double> wind_at_rate(wind_trace.values().begin(), wind_trace.values().end());
    const std::vector<double> rolling_mrad = scaled(rolling.values(), 1e3);
    out.records.push_back(to_record(walk.name, fit_power_law(rolling_mrad, wind_at_rate)));

    const SampledTrace s1 = stokes_component(stokes, 0);
    const std::size_t segment = std::min(kPolarizationSegment, s1.size());
    const SpectrumEstimate psd = welch_psd(s1, segment);
    out.records.push_back(slope_record(walk.name + "_s1_psd",
                                       psd_slope(psd, kPolarizationSlopeLow, kPolarizationSlopeHigh),
                                       kPolarizationSlopeLow, kPolarizationSlopeHigh, segment));

    if (drift_columns.empty()) {
      std::vector<double> t(rate.size());
      for (std::size_t i = 0; i < rate.size(); ++i) t[i] = rate.time(i);
      drift_columns.push_back({"time_s", std::move(t)});
      drift_columns.push_back({"wind_mph", wind_at_rate});
    }
    drift_columns.push_back({"drift_" + walk.column + "_mrad_per_s", scaled(rate.values(), 1e3)});
    drift_columns.push_back({"rolling_" + walk.column + "_mrad_per_s", rolling_mrad});

    if (spectro_columns.empty() && s1.size() >= static_cast<std::size_t>(kSpectrogramWindow / kPolarizationDt)) {
      std::vector<double> start;
      std::vector<double> freq;
      std::vector<double> power;
      for (const auto& window : spectrogram(s1, kSpectrogramWindow)) {
        for (std::size_t k = 1; k < window.frequencies.size(); ++k) {
          start.push_back(window.start_time);
          freq.push_back(window.frequencies[k]);
          power.push_back(window.power[k]);
        }
      }
      spectro_columns = {{"window_start_s", std::move(start)},
                         {"frequency_hz", std::move(freq)},
                         {"psd_s1_" + walk.column + "_per_hz", std::move(power)}};
    }
  }
  out.plots.push_back({"polarization_drift_vs_wind", std::move(drift_columns)});
  if (!spectro_columns.empty()) out.plots.push_back({"polarization_spectrogram", std::move(spectro_columns)});
  return out;
}

// ------------------------------------------------------------------- delay

SampledTrace temperature_on_grid(const Scenario& s, double duration, double dt) {
  if (s.temperature) {
    const CsvParseResult parsed = parse_weather_csv(*s.temperature);
    require_unit(parsed.series.unit, Unit::Celsius, "temperature file");
    const auto& ts = parsed.series.timestamps;
    const double span = std::min(duration, ts.back() - ts.front());
    if (!(span >= dt)) {
      throw ConfigError(fmt::format("temperature file {} covers less than one step", s.temperature->string()));
    }
    const auto n = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;
    const SampledTrace absolute = align_to(parsed.series, TimeGrid{ts.front(), dt, n});
    return SampledTrace(0.0, dt, std::vector<double>(absolute.values().begin(), absolute.values().end()),
                        Unit::Celsius);
  }
  SyntheticWeather shape;
  shape.mean = 5.0;
  shape.diurnal_amplitude = 5.0;
  shape.diurnal_phase = -constants::kPi / 2.0;
  shape.noise_sigma = 0.5;
  shape.min_value = -40.0;
  shape.max_value = 50.0;
  const EnvironmentSeries synthetic = synthetic_weather(shape, Unit::Celsius, 0.0, duration, dt, RandomSeed{s.seed});
  return align_to(synthetic, TimeGrid{0.0, dt, synthetic.size()});
}

ThermalDelayParams scaled_thermal(const ThermalDelayParams& p, double factor) {
  return {p.alpha_length * factor, p.alpha_index * factor};
}

ScenarioResult characterize_delay(const Scenario& s) {
  require_supported(s);
  const Calibration cal = calibration_for(s);
  const SampledTrace temperature = temperature_on_grid(s, s.duration.value_or(kDefaultDay), kDelayDt);
  const double t_ref = temperature[0];
  const FiberSpan& a = cal.span(SpanId::A);
  const FiberSpan& b = cal.span(SpanId::B);

  ScenarioResult out;
  out.records.push_back(scenario_record(s, temperature.end_time() - temperature.t0()));
  std::vector<PlotColumn> columns;
  {
    std::vector<double> t(temperature.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = temperature.time(i);
    columns.push_back({"time_s", std::move(t)});
    columns.push_back({"temperature_c", std::vector<double>(temperature.values().begin(), temperature.values().end())});
  }

  if (wants(s, ConfigurationKind::RoundTrip)) {
    const SampledTrace rt = simulate_thermal_delay(a.thermal, temperature, cal.tau0_round_trip_s, t_ref);
    out.records.push_back(to_record("thermal_round_trip", fit_linear(rt, temperature), "s/C"));
    const SampledTrace sum = simulate_thermal_delay(a.thermal, temperature, cal.tau0_one_way_sum_s, t_ref);
    out.records.push_back(to_record("thermal_one_way_sum", fit_linear(sum, temperature), "s/C"));
    columns.push_back({"delay_round_trip_ns", scaled(rt.values(), 1e9)});
  }
  if (wants(s, ConfigurationKind::Differential)) {
    const double m = cal.differential_mismatch;
    const SampledTrace da =
        simulate_thermal_delay(scaled_thermal(a.thermal, 1.0 + m), temperature, transit_delay(a, cal.group_index), t_ref);
    const SampledTrace db =
        simulate_thermal_delay(scaled_thermal(b.thermal, 1.0 - m), temperature, transit_delay(b, cal.group_index), t_ref);
    const SampledTrace diff = combine(da, db, -1.0);
    out.records.push_back(to_record("thermal_differential", fit_linear(diff, temperature), "s/C"));
    columns.push_back({"delay_differential_ps", scaled(diff.values(), 1e12)});
  }
  out.plots.push_back({"delay_vs_temperature", std::move(columns)});
  return out;
}

// ---------------------------------------------------------------- protocol

ScenarioResult run_protocol(const Scenario& s) {
  const Calibration cal = calibration_for(s);
  protocol::SessionConfig config;
  if (s.session) {
    config = protocol::load_session_config(*s.session, cal);
  } else if (s.channel == ChannelPreset::Ideal) {
    config = protocol::ideal_session_config();
  } else {
    config = protocol::field_session_config(cal);
  }
  config.duration = s.duration.value_or(s.session ? config.duration : kDefaultSessionDuration);
  if (s.wind) config.channel.wind = wind_on_grid(s, config.duration + 60.0, kPolarizationDt);

  ScenarioResult out;
  out.records.push_back(scenario_record(s, config.duration));
  std::ostringstream log_text;
  std::optional<protocol::SessionLog> log;
  if (s.event_log) log.emplace(log_text);
  const protocol::SessionReport report =
      protocol::run_session(config, RandomSeed{s.seed}, log ? &*log : nullptr);
  out.records.push_back(protocol::to_record("session", report));
  out.event_log = log_text.str();

  constexpr std::size_t kJitterEvents = 10000;
  constexpr std::size_t kJitterBins = 61;
  const double jitter = config.channel.timing_jitter;
  if (jitter > 0.0) {
    const auto offsets = protocol::timing_offsets(jitter, kJitterEvents, RandomSeed{s.seed});
    const double edge = 5.0 * jitter;
    const auto density = histogram_density(offsets, -edge, edge, kJitterBins);
    std::vector<double> centers(kJitterBins);
    std::vector<double> counts(kJitterBins);
    const double width = 2.0 * edge / static_cast<double>(kJitterBins);
    for (std::size_t i = 0; i < kJitterBins; ++i) {
      centers[i] = (-edge + (static_cast<double>(i) + 0.5) * width) * 1e12;
      counts[i] = std::round(density[i] * width * static_cast<double>(kJitterEvents));
    }
    out.plots.push_back({"timing_jitter_histogram", {{"offset_ps", std::move(centers)}, {"events", std::move(counts)}}});
  }
  out.plots.push_back({"ber_by_state",
                       {{"state_minus", {0.0, 1.0}}, {"ber", {report.ber_plus, report.ber_minus}}}});
  return out;
}

}  // namespace

std::string_view to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::CharacterizePhase: return "characterize-phase";
    case Pipeline::CharacterizePolarization: return "characterize-polarization";
    case Pipeline::CharacterizeDelay: return "characterize-delay";
    case Pipeline::RunProtocol: return "run-protocol";
  }
  return "?";
}

ConfigurationKind parse_configuration(std::string_view text) { return configuration_kind_from_string(text); }

ChannelPreset parse_channel(std::string_view text) {
  if (text == "field") return ChannelPreset::Field;
  if (text == "ideal") return ChannelPreset::Ideal;
  throw ConfigError(fmt::format("unknown channel preset '{}' (expected field or ideal)", text));
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open scenario file {}", path.string()));
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.message()));
  }
  for (const auto& [name, section] : tree) {
    if (name != "scenario") throw ConfigError(fmt::format("{}: unknown section [{}]", path.string(), name));
  }
  const auto base = path.parent_path();
  const auto resolve = [&](const std::string& key) -> std::optional<std::filesystem::path> {
    const auto v = tree.get_optional<std::string>("scenario." + key);
    if (!v) return std::nullopt;
    std::filesystem::path p(*v);
    return p.is_absolute() ? p : base / p;
  };

  ScenarioFile f;
  try {
    if (const auto v = tree.get_optional<std::string>("scenario.configuration")) f.configuration = *v;
    if (const auto v = tree.get_optional<std::string>("scenario.channel")) f.channel = *v;
    if (const auto seed = tree.get_optional<std::uint64_t>("scenario.seed")) f.seed = *seed;
    if (const auto duration = tree.get_optional<double>("scenario.duration_s")) f.duration = *duration;
  } catch (const pt::ptree_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  f.calibration = resolve("calibration");
  f.session = resolve("session");
  f.wind = resolve("wind_csv");
  f.temperature = resolve("temperature_csv");
  f.out = resolve("out");
  return f;
}

void apply(const ScenarioFile& file, Scenario& s) {
  if (file.configuration) s.configuration = parse_configuration(*file.configuration);
  if (file.calibration) s.calibration = file.calibration;
  if (file.session) s.session = file.session;
  if (file.wind) s.wind = file.wind;
  if (file.temperature) s.temperature = file.temperature;
  if (file.channel) s.channel = parse_channel(*file.channel);
  if (file.seed) s.seed = *file.seed;
  if (file.duration) s.duration = file.duration;
  if (file.out) s.out = *file.out;
}

void validate(const Scenario& s) {
  if (s.duration && !(*s.duration > 0.0)) throw ConfigError(fmt::format("duration must be positive, got {}", *s.duration));
  const auto check = [](const std::optional<std::filesystem::path>& p, std::string_view what) {
    if (p && !std::filesystem::is_regular_file(*p)) {
      throw ConfigError(fmt::format("{} file not found: {}", what, p->string()));
    }
  };
  check(s.calibration, "calibration");
  check(s.session, "session");
  check(s.wind, "wind");
  check(s.temperature, "temperature");
}

ScenarioResult run_scenario(const Scenario& scenario) {
  validate(scenario);
  switch (scenario.pipeline) {
    case Pipeline::CharacterizePhase: return characterize_phase(scenario);
    case Pipeline::CharacterizePolarization: return characterize_polarization(scenario);
    case Pipeline::CharacterizeDelay: return characterize_delay(scenario);
    case Pipeline::RunProtocol: return run_protocol(scenario);
  }
  throw ConfigError("unknown pipeline");
}

void write_outputs(const ScenarioResult& result, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", directory.string(), ec.message()));
  emit_report(result.records, directory / "report.txt");
  for (const auto& plot : result.plots) write_plot_data(directory / (plot.name + ".dat"), plot.columns);
  if (!result.event_log.empty()) {
    std::ofstream log(directory / "events.csv", std::ios::binary);
    if (!log) throw IoError(fmt::format("cannot write {}", (directory / "events.csv").string()));
    log << result.event_log;
  }
}

}  // namespace fibertb::cli
