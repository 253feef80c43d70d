#pragma once

#include <cstddef>
#include <cstdint>

#include "fibertb/protocol/qubit.hpp"
#include "fibertb/random.hpp"

namespace fibertb::protocol {

/// Time-delay interferometer with a piezo-actuated long arm.
struct TdiState {
  double path_imbalance = 0.0;  // actuator setting, metres (written only by the lock)
  double path_drift = 0.0;      // environmental drift, metres
  double delay = kBinSpacing;   // arm delay, seconds; FSR = 1 / delay
  double wavelength = 1350e-9;
  double lock_integrator = 0.0;  // radians
  double visibility = 1.0;
  std::size_t unlocked_steps = 0;

  double fsr() const { return 1.0 / delay; }
};

/// Throws InvalidArgument unless 0 <= visibility <= 1 and delay > 0.
void validate(const TdiState& tdi);

/// Interferometer phase seen by qubit light, wrapped to (-pi, pi].
double tdi_phase(const TdiState& tdi);

/// Phase seen by reference light shifted by `frequency_offset` (AOM).
double reference_phase(const TdiState& tdi, double frequency_offset);

/// Reference fringe (1 + V cos phi_ref) / 2 in [0, 1].
double reference_fringe(const TdiState& tdi, double frequency_offset);

/// AOM shift that puts the qubit at fringe maximum when the reference sits
/// at quadrature: a quarter of the FSR.
double quadrature_offset(const TdiState& tdi);

struct SlotProbabilities {
  double early = 0.0;
  double middle_port0 = 0.0;
  double middle_port1 = 0.0;
  double late = 0.0;

  double middle() const { return middle_port0 + middle_port1; }
};

/// Where a single photon of `qubit` is detected after the TDI. Outer slots
/// carry the non-interfering halves; the middle slot splits between ports
/// as (1 +/- V cos(phase - phi_TDI)) / 2 for equal amplitudes.
SlotProbabilities slot_probabilities(const TimeBinQubit& qubit, const TdiState& tdi);

struct SlotCounts {
  std::uint64_t early = 0;
  std::uint64_t middle_port0 = 0;
  std::uint64_t middle_port1 = 0;
  std::uint64_t late = 0;
  std::uint64_t trials_with_photons = 0;

  std::uint64_t middle() const { return middle_port0 + middle_port1; }
};

/// Photon counts per slot over n_trials pulses with Poisson photon numbers.
/// Throws DelayMismatch unless the TDI delay equals the qubit bin spacing.
SlotCounts tdi_measure(const TimeBinQubit& qubit, const TdiState& tdi, std::size_t n_trials,
                       double mean_photon_number, RandomSeed seed);

struct PiGains {
  double kp = 0.4;   // radians per unit fringe error
  double ki = 0.02;  // radians per unit fringe error per step
  double lost_error = 0.25;
  std::size_t lost_dwell_steps = 1000;
};

/// One PI update driving the reference fringe to 0.5. Positive error moves
/// the reference phase up, which makes phi_ref = +pi/2 (qubit phase 0) the
/// stable point. Throws LockLost when |error| > lost_error for more than
/// lost_dwell_steps consecutive steps.
TdiState tdi_lock_step(double reference_power, const TdiState& tdi, const PiGains& gains);

/// Qubit-phase error produced by an uncompensated path change.
double phase_error_for_path_drift(double path_change, double wavelength);

}  // namespace fibertb::protocol
