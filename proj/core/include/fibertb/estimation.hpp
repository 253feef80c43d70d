#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fibertb/trace.hpp"

namespace fibertb {

struct GaussianFit {
  double variance = 0.0;  // unbiased, trace unit squared
  double mean = 0.0;
  std::size_t n_samples = 0;
  double variance_std_error = 0.0;  // V sqrt(2 / (n - 1)) under normality
};

struct SpanNoiseEstimate {
  double variance = 0.0;    // V
  double covariance = 0.0;  // C
  /// |C| > V, i.e. a correlation coefficient above one.
  bool unphysical = false;
};

struct PowerLawFit {
  double kappa = 0.0;
  double n_exponent = 0.0;
  double kappa_std_error = 0.0;
  double n_std_error = 0.0;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  std::size_t n_points = 0;
  std::size_t n_excluded = 0;  // points dropped for y <= 0 or x <= 0
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double intercept_std_error = 0.0;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  std::size_t n_points = 0;
};

/// Adjusted R^2 with p regressors (excluding the intercept). Falls back to
/// R^2 when n - p - 1 <= 0.
double adjusted_r_squared(double r_squared, std::size_t n, std::size_t p);

/// Instantaneous frequency (phi_{k+1} - phi_k) / (2 pi dt). One sample shorter.
SampledTrace differentiate_phase(const SampledTrace& phase);

/// Block-mean decimation by round(native / target). Each output sample sits
/// at the centre of its block; a trailing partial block is dropped.
SampledTrace downsample(const SampledTrace& trace, double target_rate);

GaussianFit fit_gaussian_variance(std::span<const double> samples);

/// Per-span variance and cross-span covariance from the differential and
/// round-trip variances: V = (V_R + V_D) / 4, C = (V_R - V_D) / 4.
SpanNoiseEstimate span_variance_covariance(double v_differential, double v_round_trip);

/// Great-circle angle between successive samples divided by dt.
SampledTrace polarization_drift_rate(const StokesTrace& stokes);

/// Centred moving average over round(window / dt) samples, truncated at the
/// edges to the samples available.
SampledTrace rolling_mean(const SampledTrace& trace, double window);

/// Least squares on log y = log kappa + n log x over points with x, y > 0.
PowerLawFit fit_power_law(std::span<const double> y, std::span<const double> x);
PowerLawFit fit_power_law(const SampledTrace& y, const SampledTrace& x);

LinearFit fit_linear(std::span<const double> y, std::span<const double> x);
LinearFit fit_linear(const SampledTrace& y, const SampledTrace& x);

/// Piecewise-linear interpolation through (knot_t, knot_v). Exact at the
/// knots; throws OutOfRange outside [knot_t.front(), knot_t.back()].
std::vector<double> interpolate_linear(std::span<const double> knot_t, std::span<const double> knot_v,
                                       std::span<const double> query_t);

/// Resamples `series` onto `target`. Never extrapolates.
SampledTrace resample_linear(const SampledTrace& series, const TimeGrid& target);
std::vector<double> resample_linear(const SampledTrace& series, std::span<const double> target_t);

}  // namespace fibertb
