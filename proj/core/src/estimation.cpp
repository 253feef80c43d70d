#include "fibertb/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb {

namespace {

constexpr double kKnotSnap = 1e-9;

struct Ols {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = intercept + slope x. Caller guarantees n >= 2
// and a non-constant x.
Ols ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xm;
    const double dy = y[i] - ym;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  Ols fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  if (syy > 0.0) {
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  } else {
    fit.r_squared = 1.0;
  }
  if (x.size() > 2) {
    const double s2 = ss_res / (n - 2.0);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / n + xm * xm / sxx));
  }
  return fit;
}

bool has_spread(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi > *lo;
}

void require_aligned(const SampledTrace& y, const SampledTrace& x, std::string_view op) {
  if (!same_grid(y.grid(), x.grid())) {
    throw InvalidArgument(fmt::format("{}: traces are not on a common time grid", op));
  }
}

void require_same_length(std::size_t a, std::size_t b, std::string_view op) {
  if (a != b) throw InvalidArgument(fmt::format("{}: {} values against {} abscissae", op, a, b));
}

}  // namespace

double adjusted_r_squared(double r_squared, std::size_t n, std::size_t p) {
  if (n <= p + 1) return r_squared;
  const auto nn = static_cast<double>(n);
  const auto pp = static_cast<double>(p);
  return 1.0 - (1.0 - r_squared) * (nn - 1.0) / (nn - pp - 1.0);
}

SampledTrace differentiate_phase(const SampledTrace& phase) {
  require_unit(phase.unit(), Unit::Radians, "differentiate_phase");
  if (phase.size() < 2) throw TooShort("differentiate_phase needs at least two samples");
  const auto p = phase.values();
  const double scale = 1.0 / (constants::kTwoPi * phase.dt());
  std::vector<double> f(p.size() - 1);
  for (std::size_t k = 0; k + 1 < p.size(); ++k) f[k] = (p[k + 1] - p[k]) * scale;
  return SampledTrace(phase.t0(), phase.dt(), std::move(f), Unit::Hertz);
}

SampledTrace downsample(const SampledTrace& trace, double target_rate) {
  if (!(target_rate > 0.0) || !std::isfinite(target_rate)) {
    throw InvalidRate(fmt::format("target rate must be positive, got {}", target_rate));
  }
  const double native = trace.rate();
  if (target_rate > native * (1.0 + 1e-9)) {
    throw RateTooHigh(fmt::format("target rate {} Hz exceeds native rate {} Hz", target_rate, native));
  }
  const auto factor = static_cast<std::size_t>(std::max(1.0, std::round(native / target_rate)));
  if (factor == 1) return trace;
  const std::size_t blocks = trace.size() / factor;
  if (blocks == 0) throw TooShort("trace is shorter than one decimation block");
  const auto v = trace.values();
  std::vector<double> out(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto first = v.begin() + static_cast<std::ptrdiff_t>(b * factor);
    out[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(factor), 0.0) / static_cast<double>(factor);
  }
  const double dt = trace.dt() * static_cast<double>(factor);
  const double t0 = trace.t0() + 0.5 * static_cast<double>(factor - 1) * trace.dt();
  return SampledTrace(t0, dt, std::move(out), trace.unit());
}

GaussianFit fit_gaussian_variance(std::span<const double> samples) {
  if (samples.size() < 2) throw TooShort("variance needs at least two samples");
  const auto n = static_cast<double>(samples.size());
  // Shift by the first sample so identical inputs give exactly zero.
  const double shift = samples.front();
  double sum = 0.0;
  for (const double s : samples) sum += s - shift;
  const double offset = sum / n;
  double ss = 0.0;
  for (const double s : samples) {
    const double d = (s - shift) - offset;
    ss += d * d;
  }
  GaussianFit fit;
  fit.mean = shift + offset;
  fit.variance = ss / (n - 1.0);
  fit.n_samples = samples.size();
  fit.variance_std_error = fit.variance * std::sqrt(2.0 / (n - 1.0));
  return fit;
}

SpanNoiseEstimate span_variance_covariance(double v_differential, double v_round_trip) {
  if (!(v_differential >= 0.0) || !(v_round_trip >= 0.0)) {
    throw InvalidArgument("variances must be non-negative");
  }
  SpanNoiseEstimate out;
  out.variance = (v_round_trip + v_differential) / 4.0;
  out.covariance = (v_round_trip - v_differential) / 4.0;
  out.unphysical = std::abs(out.covariance) > out.variance;
  return out;
}

SampledTrace polarization_drift_rate(const StokesTrace& stokes) {
  require_unit(stokes.unit(), Unit::Stokes, "polarization_drift_rate");
  if (stokes.size() < 2) throw TooShort("drift rate needs at least two polarization samples");
  std::vector<double> rate(stokes.size() - 1);
  for (std::size_t k = 0; k + 1 < stokes.size(); ++k) {
    rate[k] = great_circle_angle(stokes[k], stokes[k + 1]) / stokes.dt();
  }
  return SampledTrace(stokes.t0(), stokes.dt(), std::move(rate), Unit::RadiansPerSecond);
}

SampledTrace rolling_mean(const SampledTrace& trace, double window) {
  if (!(window > 0.0) || !std::isfinite(window)) {
    throw InvalidArgument(fmt::format("window must be positive, got {}", window));
  }
  const auto w = static_cast<std::size_t>(std::max(1.0, std::round(window / trace.dt())));
  if (w == 1) return trace;
  const auto v = trace.values();
  const std::size_t n = v.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];
  // Odd windows are symmetric; even ones reach one sample further back.
  const std::size_t back = w / 2;
  const std::size_t ahead = w - back - 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= back ? k - back : 0;
    const std::size_t hi = std::min(n, k + ahead + 1);
    out[k] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return SampledTrace(trace.t0(), trace.dt(), std::move(out), trace.unit());
}

PowerLawFit fit_power_law(std::span<const double> y, std::span<const double> x) {
  require_same_length(y.size(), x.size(), "fit_power_law");
  std::vector<double> lx;
  std::vector<double> ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 3) {
    throw DegenerateInput(fmt::format("power-law fit needs 3 positive points, have {}", lx.size()));
  }
  if (!has_spread(lx)) throw DegenerateInput("power-law fit: abscissa is constant");
  const Ols ols = ordinary_least_squares(lx, ly);
  PowerLawFit fit;
  fit.n_exponent = ols.slope;
  fit.kappa = std::exp(ols.intercept);
  fit.n_std_error = ols.slope_se;
  fit.kappa_std_error = fit.kappa * ols.intercept_se;
  fit.r_squared = ols.r_squared;
  fit.adj_r_squared = adjusted_r_squared(ols.r_squared, lx.size(), 1);
  fit.n_points = lx.size();
  fit.n_excluded = x.size() - lx.size();
  return fit;
}

PowerLawFit fit_power_law(const SampledTrace& y, const SampledTrace& x) {
  require_aligned(y, x, "fit_power_law");
  return fit_power_law(y.values(), x.values());
}

LinearFit fit_linear(std::span<const double> y, std::span<const double> x) {
  require_same_length(y.size(), x.size(), "fit_linear");
  if (x.size() < 2 || !has_spread(x)) throw DegenerateInput("linear fit needs two distinct abscissae");
  const Ols ols = ordinary_least_squares(x, y);
  LinearFit fit;
  fit.slope = ols.slope;
  fit.intercept = ols.intercept;
  fit.slope_std_error = ols.slope_se;
  fit.intercept_std_error = ols.intercept_se;
  fit.r_squared = ols.r_squared;
  fit.adj_r_squared = adjusted_r_squared(ols.r_squared, x.size(), 1);
  fit.n_points = x.size();
  return fit;
}

LinearFit fit_linear(const SampledTrace& y, const SampledTrace& x) {
  require_aligned(y, x, "fit_linear");
  return fit_linear(y.values(), x.values());
}

std::vector<double> interpolate_linear(std::span<const double> knot_t, std::span<const double> knot_v,
                                       std::span<const double> query_t) {
  require_same_length(knot_v.size(), knot_t.size(), "interpolate_linear");
  if (knot_t.empty()) throw TooShort("interpolation needs at least one knot");
  for (std::size_t i = 1; i < knot_t.size(); ++i) {
    if (!(knot_t[i] > knot_t[i - 1])) throw InvalidArgument("knot times must be strictly increasing");
  }
  const double lo = knot_t.front();
  const double hi = knot_t.back();
  const double tol = kKnotSnap * std::max(hi - lo, 1e-300);
  std::vector<double> out;
  out.reserve(query_t.size());
  for (const double q : query_t) {
    if (!(q >= lo - tol && q <= hi + tol)) {
      throw OutOfRange(fmt::format("time {} lies outside [{}, {}]", q, lo, hi));
    }
    if (knot_t.size() == 1 || q <= lo) {
      out.push_back(knot_v.front());
      continue;
    }
    if (q >= hi) {
      out.push_back(knot_v.back());
      continue;
    }
    const auto it = std::upper_bound(knot_t.begin(), knot_t.end(), q);
    const auto i = static_cast<std::size_t>(it - knot_t.begin()) - 1;
    const double frac = (q - knot_t[i]) / (knot_t[i + 1] - knot_t[i]);
    if (frac < kKnotSnap) {
      out.push_back(knot_v[i]);
    } else if (frac > 1.0 - kKnotSnap) {
      out.push_back(knot_v[i + 1]);
    } else {
      out.push_back(knot_v[i] + frac * (knot_v[i + 1] - knot_v[i]));
    }
  }
  return out;
}

std::vector<double> resample_linear(const SampledTrace& series, std::span<const double> target_t) {
  const auto v = series.values();
  const double last = static_cast<double>(v.size() - 1);
  std::vector<double> out;
  out.reserve(target_t.size());
  for (const double t : target_t) {
    double u = (t - series.t0()) / series.dt();
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < kKnotSnap) u = nearest;
    if (u < 0.0 || u > last) {
      throw OutOfRange(fmt::format("time {} lies outside [{}, {}]", t, series.t0(), series.end_time()));
    }
    const auto i = static_cast<std::size_t>(std::floor(u));
    const double frac = u - static_cast<double>(i);
    out.push_back(frac == 0.0 ? v[i] : v[i] + frac * (v[i + 1] - v[i]));
  }
  return out;
}

SampledTrace resample_linear(const SampledTrace& series, const TimeGrid& target) {
  std::vector<double> times(target.size);
  for (std::size_t i = 0; i < target.size; ++i) times[i] = target.time(i);
  return SampledTrace(target.t0, target.dt, resample_linear(series, times), series.unit());
}

}  // namespace fibertb
