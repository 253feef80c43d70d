#include "fibertb/protocol/qubit.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb::protocol {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

TimeBinQubit TimeBinQubit::plus() { return {kInvSqrt2, kInvSqrt2, 0.0}; }
TimeBinQubit TimeBinQubit::minus() { return {kInvSqrt2, kInvSqrt2, constants::kPi}; }
TimeBinQubit TimeBinQubit::early() { return {1.0, 0.0, 0.0}; }
TimeBinQubit TimeBinQubit::late() { return {0.0, 1.0, 0.0}; }
TimeBinQubit TimeBinQubit::from_bit(std::uint8_t bit) { return bit == 0 ? plus() : minus(); }

void validate(const TimeBinQubit& qubit) {
  const double norm = qubit.amp_early * qubit.amp_early + qubit.amp_late * qubit.amp_late;
  if (std::abs(norm - 1.0) > 1e-9) throw InvalidArgument(fmt::format("qubit amplitudes have norm {}", norm));
  if (!(qubit.bin_spacing > 0.0) || !(qubit.pulse_fwhm > 0.0)) {
    throw InvalidArgument("bin spacing and pulse width must be positive");
  }
}

double lorentzian(double t, double fwhm) {
  const double half = 0.5 * fwhm;
  return half / (constants::kPi * (t * t + half * half));
}

Waveform carve_time_bins(const TimeBinQubit& qubit, double t0, double dt) {
  validate(qubit);
  if (!(dt > 0.0)) throw InvalidRate(fmt::format("sample period must be positive, got {}", dt));
  if (dt > 1e-9) throw RateTooLow(fmt::format("sample period {} s is coarser than 1 ns", dt));
  const double margin = 10.0 * qubit.pulse_fwhm;
  const double start = t0 - margin;
  const auto n = static_cast<std::size_t>(std::floor((qubit.bin_spacing + 2.0 * margin) / dt)) + 1;
  const double we = qubit.amp_early * qubit.amp_early;
  const double wl = qubit.amp_late * qubit.amp_late;
  std::vector<double> intensity(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = start + static_cast<double>(i) * dt;
    intensity[i] = we * lorentzian(t - t0, qubit.pulse_fwhm) + wl * lorentzian(t - t0 - qubit.bin_spacing, qubit.pulse_fwhm);
  }
  return {SampledTrace(start, dt, std::move(intensity), Unit::Intensity), t0, qubit.bin_spacing,
          qubit.relative_phase};
}

double timing_offset(double jitter_std, RandomSeed seed, std::uint64_t event) {
  if (!(jitter_std >= 0.0)) throw InvalidArgument("jitter must be non-negative");
  if (jitter_std == 0.0) return 0.0;
  Rng rng(CounterEngine(seed, streams::kTimingJitter).substream(event));
  return jitter_std * rng.normal();
}

std::vector<double> timing_offsets(double jitter_std, std::size_t n_events, RandomSeed seed) {
  std::vector<double> out(n_events);
  for (std::size_t i = 0; i < n_events; ++i) out[i] = timing_offset(jitter_std, seed, i);
  return out;
}

Waveform apply_timing_jitter(const Waveform& waveform, double jitter_std, RandomSeed seed, std::uint64_t event) {
  const double offset = timing_offset(jitter_std, seed, event);
  if (offset == 0.0) return waveform;
  const auto& in = waveform.intensity;
  std::vector<double> values(in.values().begin(), in.values().end());
  return {SampledTrace(in.t0() + offset, in.dt(), std::move(values), in.unit()), waveform.early_center + offset,
          waveform.bin_spacing, waveform.late_phase};
}

long long bin_assignment_shift(double offset, double bin_spacing) { return std::llround(offset / bin_spacing); }

std::size_t count_bin_assignment_errors(double jitter_std, std::size_t n_trials, RandomSeed seed,
                                        double bin_spacing) {
  if (!(jitter_std >= 0.0)) throw InvalidArgument("jitter must be non-negative");
  Rng rng(seed, streams::kTimingJitter);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n_trials; ++i) {
    if (bin_assignment_shift(jitter_std * rng.normal(), bin_spacing) != 0) ++errors;
  }
  return errors;
}

}  // namespace fibertb::protocol
