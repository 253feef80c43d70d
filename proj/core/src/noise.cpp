#include "fibertb/noise.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb {

void validate(const PhaseNoiseParams& params) {
  if (!(params.v_hz2_per_m >= 0.0)) throw ConfigError("phase noise: v must be non-negative");
  if (!(params.covariance_fraction >= 0.0 && params.covariance_fraction <= 1.0)) {
    throw ConfigError("phase noise: covariance fraction must lie in [0, 1]");
  }
  if (!(params.calibration_dt > 0.0)) throw ConfigError("phase noise: calibration_dt must be positive");
}

void validate(const PolarizationDriftParams& params) {
  if (!(params.kappa >= 0.0)) throw ConfigError("polarization drift: kappa must be non-negative");
  if (!std::isfinite(params.n_exponent)) throw ConfigError("polarization drift: exponent must be finite");
}

void validate(const ThermalDelayParams& params) {
  if (!(params.alpha_length >= 0.0 && params.alpha_index >= 0.0)) {
    throw ConfigError("thermal: coefficients must be non-negative");
  }
}

void validate(const PhaseStabilizerParams& params) {
  if (!(params.bandwidth_3db > 0.0)) throw ConfigError("stabilizer: bandwidth must be positive");
}

double frequency_variance(const PhaseNoiseParams& params, double length_m, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidRate(fmt::format("sample period must be positive, got {}", dt));
  return params.v_hz2_per_m * length_m * params.calibration_dt / dt;
}

FrequencyPair simulate_frequency_pair(const PhaseNoiseParams& params, double length_m, double duration,
                                      double dt, RandomSeed seed, double t0) {
  validate(params);
  if (!(length_m >= 0.0)) throw InvalidArgument("span length must be non-negative");
  const double sigma = std::sqrt(frequency_variance(params, length_m, dt));
  if (!(duration >= dt)) throw TooShort(fmt::format("duration {} s is shorter than one sample", duration));
  const auto n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));

  const double common = std::sqrt(params.covariance_fraction);
  const double own = std::sqrt(1.0 - params.covariance_fraction);
  Rng rc(seed, streams::kFrequencyCommon);
  Rng ra(seed, streams::kFrequencyA);
  Rng rb(seed, streams::kFrequencyB);

  std::vector<double> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double zc = common * rc.normal();
    a[i] = sigma * (zc + own * ra.normal());
    b[i] = sigma * (zc + own * rb.normal());
  }
  return {SampledTrace(t0, dt, std::move(a), Unit::Hertz), SampledTrace(t0, dt, std::move(b), Unit::Hertz)};
}

SampledTrace integrate_phase(const SampledTrace& frequency) {
  require_unit(frequency.unit(), Unit::Hertz, "integrate_phase");
  const auto f = frequency.values();
  std::vector<double> phase(f.size() + 1);
  phase[0] = 0.0;
  const double scale = constants::kTwoPi * frequency.dt();
  for (std::size_t k = 0; k < f.size(); ++k) phase[k + 1] = phase[k] + scale * f[k];
  return SampledTrace(frequency.t0(), frequency.dt(), std::move(phase), Unit::Radians);
}

double rayleigh_sigma_for_rate(double mean_rate, double dt) {
  return mean_rate * dt / std::sqrt(constants::kPi / 2.0);
}

double mean_drift_rate(const PolarizationDriftParams& params, double wind_mph) {
  if (!(wind_mph >= 0.0)) throw NegativeWind(fmt::format("wind speed {} mph is negative", wind_mph));
  if (wind_mph == 0.0) return 0.0;
  return params.kappa * std::pow(wind_mph, params.n_exponent) * 1e-3;
}

namespace {

Stokes random_tangent(const Stokes& s, Rng& rng) {
  const Stokes e1 = any_perpendicular(s);
  const Stokes e2 = s.cross(e1);
  const double psi = constants::kTwoPi * rng.uniform();
  return std::cos(psi) * e1 + std::sin(psi) * e2;
}

Stokes random_axis(Rng& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double psi = constants::kTwoPi * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(psi), r * std::sin(psi), z};
}

double wind_at(const SampledTrace& wind, double t) {
  const double u = (t - wind.t0()) / wind.dt();
  if (u <= 0.0) return wind[0];
  const auto last = wind.size() - 1;
  if (u >= static_cast<double>(last)) return wind[last];
  const auto i = static_cast<std::size_t>(std::floor(u));
  const double frac = u - static_cast<double>(i);
  return wind[i] + frac * (wind[i + 1] - wind[i]);
}

std::size_t step_count(const SampledTrace& wind, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidRate(fmt::format("step must be positive, got {}", dt));
  const double span = wind.end_time() - wind.t0();
  return static_cast<std::size_t>(std::floor(span / dt + 1e-9));
}

void check_wind(const SampledTrace& wind) {
  require_unit(wind.unit(), Unit::Mph, "polarization walk");
  for (const double w : wind.values()) {
    if (!(w >= 0.0)) throw NegativeWind(fmt::format("wind speed {} mph is negative", w));
  }
}

void check_start(const Stokes& p0) {
  if (!is_unit_stokes(p0)) throw InvalidArgument("initial polarization must be a unit Stokes vector");
}

}  // namespace

PolarizationWalker::PolarizationWalker(PolarizationDriftParams params, Stokes start, RandomSeed seed,
                                       std::uint64_t stream)
    : params_(params), state_(start.normalized()), rng_(seed, stream) {
  validate(params_);
  check_start(start);
}

const Stokes& PolarizationWalker::step(double wind_mph, double dt) {
  const double sigma = rayleigh_sigma_for_rate(mean_drift_rate(params_, wind_mph), dt);
  // Draws are taken even at zero scale so the stream position depends only on the step count.
  const double theta = rng_.rayleigh(sigma);
  const Stokes t = random_tangent(state_, rng_);
  last_angle_ = theta;
  if (theta != 0.0) state_ = (std::cos(theta) * state_ + std::sin(theta) * t).normalized();
  return state_;
}

StokesTrace simulate_polarization_walk(const PolarizationDriftParams& params, const SampledTrace& wind,
                                       double dt, const Stokes& p0, RandomSeed seed) {
  check_wind(wind);
  check_start(p0);
  const std::size_t n = step_count(wind, dt);
  PolarizationWalker walker(params, p0, seed);
  std::vector<Stokes> out;
  out.reserve(n + 1);
  out.push_back(walker.state());
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(walker.step(wind_at(wind, wind.t0() + static_cast<double>(k) * dt), dt));
  }
  return StokesTrace(wind.t0(), dt, std::move(out), Unit::Stokes);
}

StokesTrace simulate_polarization_round_trip_composed(const PolarizationDriftParams& forward,
                                                      const PolarizationDriftParams& backward,
                                                      const SampledTrace& wind, double dt,
                                                      const Stokes& p0, RandomSeed seed) {
  validate(forward);
  validate(backward);
  check_wind(wind);
  check_start(p0);
  const std::size_t n = step_count(wind, dt);

  // A rotation about a uniformly random axis moves a fixed point by theta sin(beta),
  // whose mean over the sphere is theta pi/4.
  constexpr double kAxisFactor = 4.0 / constants::kPi;
  Rng rng_a(seed, streams::kPolarizationWalk);
  Rng rng_b(seed, streams::kPolarizationWalkB);
  Rotation a = Rotation::Identity();
  Rotation b = Rotation::Identity();
  const Stokes start = p0.normalized();

  std::vector<Stokes> out;
  out.reserve(n + 1);
  out.push_back(start);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = wind_at(wind, wind.t0() + static_cast<double>(k) * dt);
    const double theta_a = rng_a.rayleigh(kAxisFactor * rayleigh_sigma_for_rate(mean_drift_rate(forward, w), dt));
    const double theta_b = rng_b.rayleigh(kAxisFactor * rayleigh_sigma_for_rate(mean_drift_rate(backward, w), dt));
    a = (Rotation(Eigen::AngleAxisd(theta_a, random_axis(rng_a))) * a).normalized();
    b = (Rotation(Eigen::AngleAxisd(theta_b, random_axis(rng_b))) * b).normalized();
    out.push_back((b.conjugate() * (a * start)).normalized());
  }
  return StokesTrace(wind.t0(), dt, std::move(out), Unit::Stokes);
}

SampledTrace simulate_thermal_delay(const ThermalDelayParams& params, const SampledTrace& temperature,
                                    double tau0, double t_ref) {
  validate(params);
  require_unit(temperature.unit(), Unit::Celsius, "simulate_thermal_delay");
  if (!(tau0 > 0.0)) throw InvalidArgument(fmt::format("tau0 must be positive, got {}", tau0));
  const double scale = params.total() * tau0;
  std::vector<double> out;
  out.reserve(temperature.size());
  for (const double t : temperature.values()) out.push_back(scale * (t - t_ref));
  return SampledTrace(temperature.t0(), temperature.dt(), std::move(out), Unit::Seconds);
}

double launch_mean_for_detector_target(double target_at_detector, double loss_db) {
  if (!(target_at_detector >= 0.0) || !(loss_db >= 0.0)) {
    throw InvalidArgument("photon number and loss must be non-negative");
  }
  return target_at_detector * std::pow(10.0, loss_db / 10.0);
}

std::vector<std::uint32_t> transmit_photons(double mean_photon_number, double loss_db, std::size_t n_pulses,
                                            RandomSeed seed) {
  if (!(mean_photon_number >= 0.0) || !(loss_db >= 0.0)) {
    throw InvalidArgument("photon number and loss must be non-negative");
  }
  const double mean = mean_photon_number * std::pow(10.0, -loss_db / 10.0);
  std::vector<std::uint32_t> counts(n_pulses, 0);
  if (mean == 0.0) return counts;
  Rng rng(seed, streams::kPhotons);
  for (auto& c : counts) c = rng.poisson(mean);
  return counts;
}

SampledTrace stabilize_phase(const SampledTrace& phase, const PhaseStabilizerParams& params) {
  require_unit(phase.unit(), Unit::Radians, "stabilize_phase");
  validate(params);
  if (phase.rate() < 2.0 * params.bandwidth_3db) {
    throw RateTooLow(fmt::format("sample rate {} Hz is below twice the loop bandwidth {} Hz", phase.rate(),
                                 params.bandwidth_3db));
  }
  const double rc = 1.0 / (constants::kTwoPi * params.bandwidth_3db);
  const double a = rc / (rc + phase.dt());
  const auto x = phase.values();
  std::vector<double> y(x.size());
  y[0] = x[0];
  for (std::size_t k = 1; k < x.size(); ++k) y[k] = a * (y[k - 1] + x[k] - x[k - 1]);
  return SampledTrace(phase.t0(), phase.dt(), std::move(y), Unit::Radians);
}

}  // namespace fibertb
