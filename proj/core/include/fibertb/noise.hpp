#pragma once

#include <cstdint>
#include <vector>

#include "fibertb/noise_params.hpp"
#include "fibertb/random.hpp"
#include "fibertb/stokes.hpp"
#include "fibertb/trace.hpp"

namespace fibertb {

struct FrequencyPair {
  SampledTrace a;
  SampledTrace b;
};

/// Per-sample variance of the frequency noise for `length_m` at sample
/// period `dt`: v L scaled by calibration_dt / dt.
double frequency_variance(const PhaseNoiseParams& params, double length_m, double dt);

/// Optical frequency noise of two copropagating spans of equal length.
///
/// Samples are i.i.d. Gaussian with variance V = v L (at the calibration
/// rate) and pairwise covariance covariance_fraction x V. With a fraction of
/// 1 the two traces are identical. Throws InvalidRate if dt <= 0 and
/// TooShort if duration < dt.
FrequencyPair simulate_frequency_pair(const PhaseNoiseParams& params, double length_m, double duration,
                                      double dt, RandomSeed seed, double t0 = 0.0);

/// Running phase: phi_0 = 0, phi_{k+1} = phi_k + 2 pi f_k dt. The output has
/// one more sample than the input.
SampledTrace integrate_phase(const SampledTrace& frequency);

/// Rayleigh scale giving a mean step angle of `mean_rate * dt`.
double rayleigh_sigma_for_rate(double mean_rate, double dt);

/// Mean drift rate kappa W^n in rad/s.
double mean_drift_rate(const PolarizationDriftParams& params, double wind_mph);

/// Stateful isotropic Rayleigh walk on the Poincare sphere.
class PolarizationWalker {
 public:
  PolarizationWalker(PolarizationDriftParams params, Stokes start, RandomSeed seed,
                     std::uint64_t stream = streams::kPolarizationWalk);

  /// Advances one step of length dt at the given wind speed and returns the new state.
  const Stokes& step(double wind_mph, double dt);
  const Stokes& state() const noexcept { return state_; }
  /// Angle of the last step, radians.
  double last_step_angle() const noexcept { return last_angle_; }

 private:
  PolarizationDriftParams params_;
  Stokes state_;
  Rng rng_;
  double last_angle_ = 0.0;
};

/// Polarization state sampled every dt over the span of `wind`.
///
/// Each step rotates the state by a Rayleigh(sigma) angle towards a uniformly
/// random tangent direction, sigma = dt kappa W(t)^n / sqrt(pi/2), so the mean
/// angular rate is kappa W^n. Wind is linearly interpolated onto the step
/// times. Throws NegativeWind for any W < 0.
StokesTrace simulate_polarization_walk(const PolarizationDriftParams& params, const SampledTrace& wind,
                                       double dt, const Stokes& p0, RandomSeed seed);

/// Alternative two-way mode: B^-1 A applied to p0, with A and B independent
/// rotation-operator walks (zero inter-span correlation).
StokesTrace simulate_polarization_round_trip_composed(const PolarizationDriftParams& forward,
                                                      const PolarizationDriftParams& backward,
                                                      const SampledTrace& wind, double dt,
                                                      const Stokes& p0, RandomSeed seed);

/// Path-delay change (alpha_L + alpha_n) tau0 (T - T_ref). Deterministic.
SampledTrace simulate_thermal_delay(const ThermalDelayParams& params, const SampledTrace& temperature,
                                    double tau0, double t_ref);

/// Mean photon number to launch so that `target_at_detector` survives `loss_db`.
double launch_mean_for_detector_target(double target_at_detector, double loss_db);

/// Photon counts per pulse, Poisson with mean mean_photon_number x 10^(-loss/10).
std::vector<std::uint32_t> transmit_photons(double mean_photon_number, double loss_db, std::size_t n_pulses,
                                            RandomSeed seed);

/// Residual phase of a first-order stabilization loop: the input high-pass
/// filtered with its corner at the loop's 3-dB bandwidth. Throws RateTooLow
/// when the sample rate is below twice the bandwidth.
SampledTrace stabilize_phase(const SampledTrace& phase, const PhaseStabilizerParams& params);

}  // namespace fibertb
