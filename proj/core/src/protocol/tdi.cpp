#include "fibertb/protocol/tdi.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb::protocol {

namespace {

double wrap(double phase) {
  double w = std::remainder(phase, constants::kTwoPi);
  if (w <= -constants::kPi) w += constants::kTwoPi;
  return w;
}

}  // namespace

void validate(const TdiState& tdi) {
  if (!(tdi.visibility >= 0.0 && tdi.visibility <= 1.0)) {
    throw InvalidArgument(fmt::format("visibility {} outside [0, 1]", tdi.visibility));
  }
  if (!(tdi.delay > 0.0)) throw InvalidArgument("interferometer delay must be positive");
  if (!(tdi.wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
}

double tdi_phase(const TdiState& tdi) {
  return wrap(constants::kTwoPi * (tdi.path_imbalance + tdi.path_drift) / tdi.wavelength);
}

double reference_phase(const TdiState& tdi, double frequency_offset) {
  return wrap(tdi_phase(tdi) + constants::kTwoPi * frequency_offset * tdi.delay);
}

double reference_fringe(const TdiState& tdi, double frequency_offset) {
  return 0.5 * (1.0 + tdi.visibility * std::cos(reference_phase(tdi, frequency_offset)));
}

double quadrature_offset(const TdiState& tdi) { return 0.25 * tdi.fsr(); }

SlotProbabilities slot_probabilities(const TimeBinQubit& qubit, const TdiState& tdi) {
  validate(qubit);
  validate(tdi);
  const double e2 = qubit.amp_early * qubit.amp_early;
  const double l2 = qubit.amp_late * qubit.amp_late;
  const double cross = 2.0 * tdi.visibility * qubit.amp_early * qubit.amp_late *
                       std::cos(qubit.relative_phase - tdi_phase(tdi));
  SlotProbabilities p;
  p.early = 0.5 * e2;
  p.late = 0.5 * l2;
  p.middle_port0 = 0.25 * (e2 + l2 + cross);
  p.middle_port1 = 0.25 * (e2 + l2 - cross);
  return p;
}

SlotCounts tdi_measure(const TimeBinQubit& qubit, const TdiState& tdi, std::size_t n_trials,
                       double mean_photon_number, RandomSeed seed) {
  if (std::abs(tdi.delay - qubit.bin_spacing) > 1e-9 * qubit.bin_spacing) {
    throw DelayMismatch(fmt::format("interferometer delay {} s does not match bin spacing {} s", tdi.delay,
                                    qubit.bin_spacing));
  }
  const SlotProbabilities p = slot_probabilities(qubit, tdi);
  const double c0 = p.early;
  const double c1 = c0 + p.middle_port0;
  const double c2 = c1 + p.middle_port1;
  Rng rng(seed, streams::kTdiMeasure);
  SlotCounts counts;
  for (std::size_t i = 0; i < n_trials; ++i) {
    const std::uint32_t photons = rng.poisson(mean_photon_number);
    if (photons > 0) ++counts.trials_with_photons;
    for (std::uint32_t k = 0; k < photons; ++k) {
      const double u = rng.uniform();
      if (u < c0) {
        ++counts.early;
      } else if (u < c1) {
        ++counts.middle_port0;
      } else if (u < c2) {
        ++counts.middle_port1;
      } else {
        ++counts.late;
      }
    }
  }
  return counts;
}

TdiState tdi_lock_step(double reference_power, const TdiState& tdi, const PiGains& gains) {
  TdiState next = tdi;
  const double error = reference_power - 0.5;
  if (std::abs(error) > gains.lost_error) {
    if (++next.unlocked_steps > gains.lost_dwell_steps) {
      throw LockLost(fmt::format("fringe error {:.3f} held for {} lock steps", error, next.unlocked_steps));
    }
  } else {
    next.unlocked_steps = 0;
  }
  next.lock_integrator += gains.ki * error;
  const double correction = gains.kp * error + next.lock_integrator;
  next.path_imbalance += correction * tdi.wavelength / constants::kTwoPi;
  return next;
}

double phase_error_for_path_drift(double path_change, double wavelength) {
  return constants::kTwoPi * path_change / wavelength;
}

}  // namespace fibertb::protocol
