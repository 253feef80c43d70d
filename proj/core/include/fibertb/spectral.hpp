#pragma once

#include <cstddef>
#include <vector>

#include "fibertb/trace.hpp"

namespace fibertb {

/// One-sided power spectral density.
struct SpectrumEstimate {
  std::vector<double> frequencies;  // Hz, strictly increasing, starting at 0
  std::vector<double> power;        // unit^2 / Hz
  Unit unit = Unit::Dimensionless;  // unit of the analysed trace
  std::size_t segment_length = 0;
  std::size_t n_segments = 0;
  double start_time = 0.0;  // time of the first analysed sample

  double resolution() const { return frequencies.size() > 1 ? frequencies[1] - frequencies[0] : 0.0; }
  /// Integral of the density over all bins.
  double total_power() const;
};

/// Averaged periodogram with a periodic Hann window, 50% overlap and
/// per-segment mean removal. Throws TooShort if segment_length < 2 or
/// exceeds the trace length.
SpectrumEstimate welch_psd(const SampledTrace& trace, std::size_t segment_length);

/// Least-squares slope of 10 log10 P against log10 f over [f_lo, f_hi], in
/// dB per decade. Throws RangeEmpty with fewer than two usable bins.
double psd_slope(const SpectrumEstimate& spectrum, double f_lo, double f_hi);

/// Non-overlapping windows, each analysed as a single Hann segment. The
/// lowest resolvable frequency is about 1 / window.
std::vector<SpectrumEstimate> spectrogram(const SampledTrace& trace, double window);

}  // namespace fibertb
