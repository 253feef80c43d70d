#include "fibertb/spectral.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>

#include <fftw3.h>
#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb {

namespace {

// FFTW planning is not thread-safe; execution with new-array functions is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  void execute() { fftw_execute(plan_); }
  double magnitude_squared(std::size_t k) const {
    const auto& c = out_.get()[k];
    return c[0] * c[0] + c[1] * c[1];
  }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(constants::kTwoPi * static_cast<double>(i) / static_cast<double>(n)));
  }
  return w;
}

SpectrumEstimate averaged_periodogram(std::span<const double> x, double dt, double start_time,
                                      std::size_t segment_length, std::size_t step, Unit unit) {
  const std::size_t n = segment_length;
  const std::size_t n_segments = 1 + (x.size() - n) / step;
  const std::size_t bins = n / 2 + 1;
  const auto window = periodic_hann(n);
  const double fs = 1.0 / dt;
  const double norm = fs * std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

  RealFft fft(n);
  std::vector<double> acc(bins, 0.0);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const auto seg = x.subspan(s * step, n);
    const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(n);
    double* in = fft.input();
    for (std::size_t i = 0; i < n; ++i) in[i] = (seg[i] - mean) * window[i];
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) acc[k] += fft.magnitude_squared(k);
  }

  SpectrumEstimate out;
  out.frequencies.resize(bins);
  out.power.resize(bins);
  out.unit = unit;
  out.segment_length = n;
  out.n_segments = n_segments;
  out.start_time = start_time;
  for (std::size_t k = 0; k < bins; ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    out.frequencies[k] = static_cast<double>(k) * fs / static_cast<double>(n);
    out.power[k] = acc[k] / (norm * static_cast<double>(n_segments)) * (unpaired ? 1.0 : 2.0);
  }
  return out;
}

}  // namespace

double SpectrumEstimate::total_power() const {
  return std::accumulate(power.begin(), power.end(), 0.0) * resolution();
}

SpectrumEstimate welch_psd(const SampledTrace& trace, std::size_t segment_length) {
  if (segment_length < 2 || segment_length > trace.size()) {
    throw TooShort(fmt::format("segment of {} samples does not fit a trace of {}", segment_length, trace.size()));
  }
  const std::size_t step = std::max<std::size_t>(1, segment_length / 2);
  return averaged_periodogram(trace.values(), trace.dt(), trace.t0(), segment_length, step, trace.unit());
}

double psd_slope(const SpectrumEstimate& spectrum, double f_lo, double f_hi) {
  if (!(f_lo < f_hi)) throw RangeEmpty(fmt::format("empty band [{}, {}] Hz", f_lo, f_hi));
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < spectrum.frequencies.size(); ++k) {
    const double f = spectrum.frequencies[k];
    const double p = spectrum.power[k];
    if (f > 0.0 && f >= f_lo && f <= f_hi && p > 0.0) {
      lx.push_back(std::log10(f));
      ly.push_back(10.0 * std::log10(p));
    }
  }
  if (lx.size() < 2) throw RangeEmpty(fmt::format("fewer than two bins in [{}, {}] Hz", f_lo, f_hi));
  const double xm = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
  const double ym = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - xm) * (lx[i] - xm);
    sxy += (lx[i] - xm) * (ly[i] - ym);
  }
  return sxy / sxx;
}

std::vector<SpectrumEstimate> spectrogram(const SampledTrace& trace, double window) {
  if (!(window > 0.0) || !std::isfinite(window)) throw TooShort("spectrogram window must be positive");
  const auto w = static_cast<std::size_t>(std::round(window / trace.dt()));
  if (w < 2) throw TooShort(fmt::format("window {} s spans fewer than two samples", window));
  const std::size_t n_windows = trace.size() / w;
  if (n_windows == 0) throw TooShort(fmt::format("trace is shorter than one {} s window", window));
  std::vector<SpectrumEstimate> out;
  out.reserve(n_windows);
  const auto v = trace.values();
  for (std::size_t i = 0; i < n_windows; ++i) {
    out.push_back(averaged_periodogram(v.subspan(i * w, w), trace.dt(), trace.time(i * w), w, w, trace.unit()));
  }
  return out;
}

}  // namespace fibertb
