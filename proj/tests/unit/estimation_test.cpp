#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fibertb/errors.hpp"
#include "fibertb/estimation.hpp"
#include "fibertb/random.hpp"
#include "fibertb/spectral.hpp"
#include "oracles.hpp"

namespace fibertb {
namespace {

std::vector<double> noisy(std::size_t n, std::uint64_t seed, double sigma) {
  Rng rng(RandomSeed{seed}, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = sigma * rng.normal();
  return v;
}

TEST(Estimation, DifferentiateInvertsIntegration) {
  const double dt = 1e-3;
  std::vector<double> phase{0.0};
  const std::vector<double> f{3.0, -1.0, 2.5, 0.0};
  for (double x : f) phase.push_back(phase.back() + 2.0 * std::numbers::pi * x * dt);
  const auto out = differentiate_phase(SampledTrace(0.0, dt, phase, Unit::Radians));
  ASSERT_EQ(out.size(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(out[i], f[i], 1e-9);
  EXPECT_EQ(out.unit(), Unit::Hertz);
  EXPECT_THROW(differentiate_phase(SampledTrace(0.0, dt, {1.0}, Unit::Radians)), TooShort);
  EXPECT_THROW(differentiate_phase(SampledTrace(0.0, dt, {1.0, 2.0}, Unit::Hertz)), UnitMismatch);
}

TEST(Estimation, DownsampleBlockMeans) {
  const SampledTrace t(0.0, 0.1, {1, 2, 3, 4, 5, 6, 7}, Unit::Hertz);
  const auto d = downsample(t, 10.0 / 3.0);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(d[0], 2.0);
  EXPECT_DOUBLE_EQ(d[1], 5.0);
  EXPECT_NEAR(d.t0(), 0.1, 1e-15);
  EXPECT_NEAR(d.dt(), 0.3, 1e-15);
  EXPECT_THROW(downsample(t, 20.0), RateTooHigh);
  EXPECT_THROW(downsample(t, 0.0), InvalidRate);
  EXPECT_THROW(downsample(t, 0.1), TooShort);
  EXPECT_EQ(downsample(t, 10.0).size(), t.size());
}

TEST(Estimation, GaussianVarianceMatchesOracle) {
  auto v = noisy(10000, 4, 3.0);
  for (auto& x : v) x += 1e6;  // large offset must not cost precision
  const auto fit = fit_gaussian_variance(v);
  EXPECT_NEAR(fit.variance, static_cast<double>(oracle::variance(v)), 1e-9 * fit.variance);
  EXPECT_NEAR(fit.mean, static_cast<double>(oracle::mean(v)), 1e-9);
  EXPECT_NEAR(fit.variance_std_error, fit.variance * std::sqrt(2.0 / 9999.0), 1e-12);
  EXPECT_THROW(fit_gaussian_variance(std::vector<double>{1.0}), TooShort);
}

TEST(Estimation, SpanVarianceAlgebra) {
  const auto e = span_variance_covariance(1.72, 21.2);
  EXPECT_NEAR(e.variance, 5.73, 1e-12);
  EXPECT_NEAR(e.covariance, 4.87, 1e-12);
  EXPECT_FALSE(e.unphysical);
  EXPECT_FALSE(span_variance_covariance(10.0, 0.0).unphysical);  // boundary: correlation exactly -1
  EXPECT_THROW(span_variance_covariance(-1.0, 1.0), InvalidArgument);
}

TEST(Estimation, DriftRateFromStokes) {
  std::vector<Stokes> s;
  for (int i = 0; i < 5; ++i) s.emplace_back(std::cos(0.1 * i), std::sin(0.1 * i), 0.0);
  const auto r = polarization_drift_rate(StokesTrace(0.0, 2.0, s, Unit::Stokes));
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], 0.05, 1e-12);
  EXPECT_EQ(r.unit(), Unit::RadiansPerSecond);
}

TEST(Estimation, RollingMeanWindows) {
  const SampledTrace t(0.0, 1.0, {1, 2, 3, 4, 5}, Unit::Hertz);
  const auto odd = rolling_mean(t, 3.0);
  EXPECT_DOUBLE_EQ(odd[0], 1.5);
  EXPECT_DOUBLE_EQ(odd[2], 3.0);
  EXPECT_DOUBLE_EQ(odd[4], 4.5);
  const auto even = rolling_mean(t, 2.0);
  EXPECT_DOUBLE_EQ(even[0], 1.0);
  EXPECT_DOUBLE_EQ(even[3], 3.5);
  EXPECT_THROW(rolling_mean(t, 0.0), InvalidArgument);
}

TEST(Estimation, PowerLawRecoversExactLaw) {
  std::vector<double> x;
  std::vector<double> y;
  for (double w = 1.0; w <= 20.0; w += 0.5) {
    x.push_back(w);
    y.push_back(1.74 * std::pow(w, 1.74));
  }
  x.push_back(0.0);
  y.push_back(3.0);
  const auto fit = fit_power_law(y, x);
  EXPECT_NEAR(fit.kappa, 1.74, 1e-9);
  EXPECT_NEAR(fit.n_exponent, 1.74, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.n_excluded, 1u);
  EXPECT_EQ(fit.n_points, x.size() - 1);
}

TEST(Estimation, PowerLawMatchesLogSpaceOracle) {
  auto eps = noisy(500, 9, 0.2);
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double w = 2.0 + 18.0 * static_cast<double>(i) / eps.size();
    x.push_back(w);
    y.push_back(0.9 * std::pow(w, 1.9) * std::exp(eps[i]));
    lx.push_back(std::log(w));
    ly.push_back(std::log(y.back()));
  }
  const auto ref = oracle::least_squares(lx, ly);
  const auto fit = fit_power_law(y, x);
  EXPECT_NEAR(fit.n_exponent, ref.slope, 1e-9);
  EXPECT_NEAR(std::log(fit.kappa), ref.intercept, 1e-9);
  EXPECT_NEAR(fit.r_squared, ref.r_squared, 1e-9);
  EXPECT_NEAR(fit.adj_r_squared, 1.0 - (1.0 - ref.r_squared) * 499.0 / 498.0, 1e-9);
}

TEST(Estimation, PowerLawDegenerate) {
  EXPECT_THROW(fit_power_law(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DegenerateInput);
  EXPECT_THROW(fit_power_law(std::vector<double>{1, 2, 3}, std::vector<double>{2, 2, 2}), DegenerateInput);
  const SampledTrace a(0.0, 1.0, {1, 2, 3}, Unit::Hertz);
  const SampledTrace b(0.5, 1.0, {1, 2, 3}, Unit::Mph);
  EXPECT_THROW(fit_power_law(a, b), InvalidArgument);
}

TEST(Estimation, LinearFitMatchesOracle) {
  auto eps = noisy(300, 2, 0.5);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    x.push_back(-10.0 + 0.1 * static_cast<double>(i));
    y.push_back(3.0 * x.back() - 2.0 + eps[i]);
  }
  const auto ref = oracle::least_squares(x, y);
  const auto fit = fit_linear(y, x);
  EXPECT_NEAR(fit.slope, ref.slope, 1e-10);
  EXPECT_NEAR(fit.intercept, ref.intercept, 1e-10);
  EXPECT_NEAR(fit.r_squared, ref.r_squared, 1e-10);
  EXPECT_THROW(fit_linear(std::vector<double>{1, 2}, std::vector<double>{3, 3}), DegenerateInput);
}

TEST(Estimation, InterpolationAndResampling) {
  const std::vector<double> kt{0.0, 1.0, 3.0};
  const std::vector<double> kv{0.0, 10.0, 30.0};
  const auto v = interpolate_linear(kt, kv, std::vector<double>{0.0, 0.5, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(v[1], 5.0);
  EXPECT_DOUBLE_EQ(v[2], 20.0);
  EXPECT_DOUBLE_EQ(v[3], 30.0);
  EXPECT_THROW(interpolate_linear(kt, kv, std::vector<double>{3.5}), OutOfRange);
  EXPECT_THROW(interpolate_linear(std::vector<double>{0.0, 0.0}, std::vector<double>{1, 2}, std::vector<double>{0.0}),
               InvalidArgument);
  const SampledTrace s(0.0, 1.0, {0, 1, 4, 9}, Unit::Mph);
  const auto r = resample_linear(s, TimeGrid{0.5, 1.0, 3});
  EXPECT_DOUBLE_EQ(r[0], 0.5);
  EXPECT_DOUBLE_EQ(r[2], 6.5);
  EXPECT_THROW(resample_linear(s, TimeGrid{0.5, 1.0, 4}), OutOfRange);
}

TEST(Spectral, WelchMatchesDirectDftOracle) {
  const auto x = noisy(1000, 6, 1.0);
  const SampledTrace t(0.0, 1e-3, x, Unit::Radians);
  const auto psd = welch_psd(t, 128);
  const auto ref = oracle::welch(x, 128, 1000.0);
  ASSERT_EQ(psd.power.size(), ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(psd.power[k], ref[k], 1e-9 * (1.0 + ref[k]));
  EXPECT_EQ(psd.n_segments, 14u);
  EXPECT_DOUBLE_EQ(psd.resolution(), 1000.0 / 128);
}

TEST(Spectral, WhiteNoiseLevelAndParseval) {
  const double fs = 100.0;
  const auto x = noisy(1 << 16, 7, 2.0);
  const auto psd = welch_psd(SampledTrace(0.0, 1.0 / fs, x, Unit::Radians), 1024);
  double mean_level = 0.0;
  for (std::size_t k = 1; k + 1 < psd.power.size(); ++k) mean_level += psd.power[k];
  mean_level /= static_cast<double>(psd.power.size() - 2);
  EXPECT_NEAR(mean_level, 2.0 * 4.0 / fs, 0.03 * 8.0 / fs);
  EXPECT_NEAR(psd.total_power(), 4.0, 0.1);
}

TEST(Spectral, BrownianSlopeIsMinus20) {
  Rng rng(RandomSeed{10}, 1);
  std::vector<double> walk(1 << 18);
  double acc = 0.0;
  for (auto& w : walk) w = (acc += rng.normal());
  const auto psd = welch_psd(SampledTrace(0.0, 1.0 / 50e3, walk, Unit::Radians), 1 << 14);
  EXPECT_NEAR(psd_slope(psd, 100.0, 1000.0), -20.0, 1.0);
  EXPECT_THROW(psd_slope(psd, 1e6, 2e6), RangeEmpty);
}

TEST(Spectral, SpectrogramWindows) {
  const auto x = noisy(3000, 1, 1.0);
  const auto frames = spectrogram(SampledTrace(0.0, 1.0, x, Unit::Dimensionless), 600.0);
  ASSERT_EQ(frames.size(), 5u);
  EXPECT_DOUBLE_EQ(frames[1].start_time, 600.0);
  EXPECT_NEAR(frames[0].resolution(), 1.0 / 600.0, 1e-15);
  EXPECT_THROW(spectrogram(SampledTrace(0.0, 1.0, x, Unit::Dimensionless), 6000.0), TooShort);
  EXPECT_THROW(welch_psd(SampledTrace(0.0, 1.0, x, Unit::Dimensionless), 4000), TooShort);
}

}  // namespace
}  // namespace fibertb
