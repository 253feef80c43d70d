#pragma once

namespace fibertb {

/// White optical-frequency noise of one span at the analysis rate.
struct PhaseNoiseParams {
  double v_hz2_per_m = 133.0;  // frequency-noise variance per metre of fibre
  /// Fraction of the per-span variance that is common to copropagating spans (C / V).
  double covariance_fraction = 4.88 / 5.74;
  /// Sample period at which v is defined (50 kHz analysis rate).
  double calibration_dt = 1.0 / 50e3;
};

/// Mean polarization drift rate law <rate> = kappa * W^n with W in mph and
/// the rate in mrad/s. kappa is in mrad/s per mph^n, which is dimensionally
/// awkward for non-integer n but matches how the field fits are quoted.
struct PolarizationDriftParams {
  double kappa = 1.74;
  double n_exponent = 1.74;

  static PolarizationDriftParams one_way() { return {1.74, 1.74}; }
  static PolarizationDriftParams round_trip() { return {0.94, 1.87}; }
};

/// Thermal path-delay coefficients, per degree Celsius.
struct ThermalDelayParams {
  double alpha_length = 0.5e-6;  // linear expansion
  double alpha_index = 8e-6;     // thermo-optic

  double total() const { return alpha_length + alpha_index; }
};

/// First-order phase stabilization loop.
struct PhaseStabilizerParams {
  double bandwidth_3db = 650e3;  // Hz
};

void validate(const PhaseNoiseParams& params);
void validate(const PolarizationDriftParams& params);
void validate(const ThermalDelayParams& params);
void validate(const PhaseStabilizerParams& params);

}  // namespace fibertb
