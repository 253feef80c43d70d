#pragma once

#include <cstdint>
#include <vector>

#include "fibertb/random.hpp"
#include "fibertb/trace.hpp"

namespace fibertb::protocol {

inline constexpr double kBinSpacing = 144.5e-9;
inline constexpr double kPulseFwhm = 45e-9;

/// Time-bin qubit: early/late amplitudes with a relative phase on the late bin.
struct TimeBinQubit {
  double amp_early = 1.0;
  double amp_late = 0.0;
  double relative_phase = 0.0;
  double bin_spacing = kBinSpacing;
  double pulse_fwhm = kPulseFwhm;  // Lorentzian

  static TimeBinQubit plus();
  static TimeBinQubit minus();
  static TimeBinQubit early();
  static TimeBinQubit late();
  /// |+> for bit 0, |-> for bit 1.
  static TimeBinQubit from_bit(std::uint8_t bit);
};

/// Throws InvalidArgument unless amp_early^2 + amp_late^2 = 1 within 1e-9.
void validate(const TimeBinQubit& qubit);

/// Carved intensity envelope of a qubit.
struct Waveform {
  SampledTrace intensity;  // Unit::Intensity; bin areas are amp^2 before the tails are cut
  double early_center = 0.0;
  double bin_spacing = kBinSpacing;
  double late_phase = 0.0;
};

/// Lorentzian density with unit area and full width `fwhm`.
double lorentzian(double t, double fwhm);

/// Two Lorentzian bins centred at t0 and t0 + bin_spacing with areas amp^2,
/// sampled every dt over t0 - 10 FWHM .. t0 + spacing + 10 FWHM. Throws
/// RateTooLow for dt above 1 ns.
Waveform carve_time_bins(const TimeBinQubit& qubit, double t0, double dt = 0.1e-9);

/// Gaussian trigger offset for `event`, std `jitter_std`.
double timing_offset(double jitter_std, RandomSeed seed, std::uint64_t event);
std::vector<double> timing_offsets(double jitter_std, std::size_t n_events, RandomSeed seed);

/// The waveform shifted in time by the trigger offset of `event`.
Waveform apply_timing_jitter(const Waveform& waveform, double jitter_std, RandomSeed seed,
                             std::uint64_t event = 0);

/// Bin index a detection lands in when the true bin centre is displaced by
/// `offset`. Nonzero means the detection is attributed to the wrong bin.
long long bin_assignment_shift(double offset, double bin_spacing = kBinSpacing);

std::size_t count_bin_assignment_errors(double jitter_std, std::size_t n_trials, RandomSeed seed,
                                        double bin_spacing = kBinSpacing);

}  // namespace fibertb::protocol
