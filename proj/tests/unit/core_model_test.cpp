#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "fibertb/calibration.hpp"
#include "fibertb/errors.hpp"
#include "fibertb/fiber.hpp"
#include "fibertb/random.hpp"
#include "fibertb/stokes.hpp"
#include "fibertb/trace.hpp"

namespace fibertb {
namespace {

const Calibration kCal = default_calibration();

TEST(Trace, RejectsBadGrid) {
  EXPECT_THROW(SampledTrace(0.0, 0.0, {1.0}, Unit::Radians), InvalidRate);
  EXPECT_THROW(SampledTrace(0.0, -1.0, {1.0}, Unit::Radians), InvalidRate);
  EXPECT_THROW(SampledTrace(0.0, 1.0, {}, Unit::Radians), TooShort);
}

TEST(Trace, StokesSamplesMustBeUnitNorm) {
  EXPECT_THROW(StokesTrace(0.0, 1.0, {Stokes(1.0, 1.0, 0.0)}, Unit::Stokes), InvalidArgument);
  EXPECT_THROW(StokesTrace(0.0, 1.0, {Stokes::UnitX()}, Unit::Radians), UnitMismatch);
  EXPECT_NO_THROW(StokesTrace(0.0, 1.0, {Stokes::UnitX(), Stokes::UnitZ()}, Unit::Stokes));
}

TEST(Trace, GridAccessors) {
  const SampledTrace t(2.0, 0.5, {1, 2, 3, 4}, Unit::Hertz);
  EXPECT_DOUBLE_EQ(t.time(3), 3.5);
  EXPECT_DOUBLE_EQ(t.end_time(), 3.5);
  EXPECT_DOUBLE_EQ(t.rate(), 2.0);
  EXPECT_TRUE(same_grid(t.grid(), TimeGrid{2.0, 0.5, 4}));
  EXPECT_FALSE(same_grid(t.grid(), TimeGrid{2.0, 0.5, 5}));
  EXPECT_THROW(require_unit(t.unit(), Unit::Radians, "test"), UnitMismatch);
}

TEST(Random, SameSeedAndStreamRepeat) {
  CounterEngine a(RandomSeed{7}, 3);
  CounterEngine b(RandomSeed{7}, 3);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(Random, StreamsAndSeedsDiffer) {
  CounterEngine a(RandomSeed{7}, 3);
  CounterEngine b(RandomSeed{7}, 4);
  CounterEngine c(RandomSeed{8}, 3);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Random, SubstreamIndependentOfPosition) {
  CounterEngine a(RandomSeed{1}, 2);
  const auto fresh = a.substream(5);
  for (int i = 0; i < 10; ++i) a();
  auto later = a.substream(5);
  auto copy = fresh;
  EXPECT_EQ(copy(), later());
}

TEST(Random, UniformIsOpenInterval) {
  Rng rng(RandomSeed{3}, 1);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
}

TEST(Random, NormalMoments) {
  Rng rng(RandomSeed{11}, 1);
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Random, PoissonMeanAndZero) {
  Rng rng(RandomSeed{5}, 1);
  EXPECT_EQ(rng.poisson(0.0), 0u);
  EXPECT_THROW(rng.poisson(-1.0), InvalidArgument);
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += rng.poisson(0.3);
  EXPECT_NEAR(s / n, 0.3, 0.3 * 0.02);
}

TEST(Stokes, GreatCircleAndSlerp) {
  const Stokes x = Stokes::UnitX();
  const Stokes y = Stokes::UnitY();
  EXPECT_NEAR(great_circle_angle(x, y), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(great_circle_angle(x, -x), std::numbers::pi, 1e-12);
  const Stokes mid = slerp(x, y, 0.5);
  EXPECT_NEAR(mid.norm(), 1.0, 1e-12);
  EXPECT_NEAR(great_circle_angle(x, mid), std::numbers::pi / 4, 1e-12);
}

TEST(Stokes, RotationTowardsMovesAlongGeodesic) {
  const Stokes x = Stokes::UnitX();
  const Stokes z = Stokes::UnitZ();
  const Stokes r = rotation_towards(x, z, 0.3) * x;
  EXPECT_NEAR(great_circle_angle(x, r), 0.3, 1e-12);
  EXPECT_NEAR(great_circle_angle(r, z), std::numbers::pi / 2 - 0.3, 1e-12);
  const Stokes p = any_perpendicular(x);
  EXPECT_NEAR(p.dot(x), 0.0, 1e-15);
  EXPECT_NEAR(p.norm(), 1.0, 1e-15);
}

TEST(Fiber, NamesRoundTrip) {
  for (auto k : {ConfigurationKind::Differential, ConfigurationKind::RoundTrip, ConfigurationKind::ThreeNode}) {
    EXPECT_EQ(configuration_kind_from_string(to_string(k)), k);
  }
  for (auto id : {SpanId::A, SpanId::B, SpanId::C, SpanId::D}) EXPECT_EQ(span_id_from_string(to_string(id)), id);
  EXPECT_THROW(configuration_kind_from_string("ring"), ConfigError);
}

TEST(Fiber, DifferentialNeedsCopropagatingSpans) {
  const std::vector<FiberSpan> ab{kCal.span(SpanId::A), kCal.span(SpanId::B)};
  const auto cfg = compose_configuration(ab, ConfigurationKind::Differential);
  ASSERT_EQ(cfg.arms.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.arms[0].length_km(), 42.5);
  const std::vector<FiberSpan> ac{kCal.span(SpanId::A), kCal.span(SpanId::C)};
  EXPECT_THROW(compose_configuration(ac, ConfigurationKind::Differential), IncompatibleSpans);
  const std::vector<FiberSpan> aa{kCal.span(SpanId::A), kCal.span(SpanId::A)};
  EXPECT_THROW(compose_configuration(aa, ConfigurationKind::Differential), IncompatibleSpans);
}

TEST(Fiber, RoundTripReturnsToOrigin) {
  const std::vector<FiberSpan> ab{kCal.span(SpanId::A), kCal.span(SpanId::B)};
  const auto cfg = compose_configuration(ab, ConfigurationKind::RoundTrip);
  ASSERT_EQ(cfg.arms.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.measured_arm().length_km(), 85.0);
  EXPECT_EQ(cfg.measured_arm().origin(), cfg.measured_arm().destination());
  EXPECT_TRUE(cfg.arms[1].is_reference());
}

TEST(Fiber, ThreeNodeChainsThroughMit) {
  const std::vector<FiberSpan> acd{kCal.span(SpanId::A), kCal.span(SpanId::C), kCal.span(SpanId::D)};
  const auto cfg = compose_configuration(acd, ConfigurationKind::ThreeNode);
  EXPECT_EQ(cfg.arms[0].origin(), Site::Lincoln);
  EXPECT_EQ(cfg.arms[0].destination(), Site::Harvard);
  EXPECT_EQ(cfg.arms[1].destination(), Site::Harvard);
  EXPECT_NEAR(cfg.measured_arm().length_km(), 50.4, 1e-12);
  const std::vector<FiberSpan> cad{kCal.span(SpanId::C), kCal.span(SpanId::A), kCal.span(SpanId::D)};
  EXPECT_THROW(compose_configuration(cad, ConfigurationKind::ThreeNode), IncompatibleSpans);
}

TEST(Fiber, RoundTripDelayMatchesMeasurement) {
  const std::vector<FiberSpan> ab{kCal.span(SpanId::A), kCal.span(SpanId::B)};
  const auto path = make_channel_path(compose_configuration(ab, ConfigurationKind::RoundTrip), Band::Nm1550);
  EXPECT_NEAR(path.arm_delays[0], 415.045e-6, 1e-12);
  EXPECT_NEAR(path.differential_delay(), 415.045e-6, 1e-12);
}

TEST(Fiber, DifferentialDelayFromTrims) {
  const std::vector<FiberSpan> ab{kCal.span(SpanId::A), kCal.span(SpanId::B)};
  const auto path = make_channel_path(compose_configuration(ab, ConfigurationKind::Differential), Band::Nm1550);
  EXPECT_NEAR(path.differential_delay(), 108.4e-9, 1e-13);
}

TEST(Fiber, NominalDelayIsLengthTimesIndexOverC) {
  const double expected = 42.5e3 * 1.47 / constants::kSpeedOfLight;
  EXPECT_NEAR(nominal_delay_for_length(42.5e3, 1.47), expected, 1e-18);
  EXPECT_THROW(nominal_delay_for_length(1.0, 1.0), InvalidArgument);
}

TEST(Fiber, LossesAndMissingBand) {
  const std::vector<FiberSpan> acd{kCal.span(SpanId::A), kCal.span(SpanId::C), kCal.span(SpanId::D)};
  const auto path = make_channel_path(compose_configuration(acd, ConfigurationKind::ThreeNode), Band::Nm1350);
  EXPECT_NEAR(total_loss(path, Band::Nm1350), 16.6 + 11.2, 1e-12);
  EXPECT_NEAR(total_loss(path, Band::Nm1550), 11.9 + 10.4, 1e-12);
  FiberSpan bare = kCal.span(SpanId::A);
  bare.loss_db.erase(Band::Nm1350);
  EXPECT_THROW(span_loss(bare, Band::Nm1350), MissingCalibration);
}

TEST(Fiber, ValidateSpan) {
  FiberSpan s = kCal.span(SpanId::A);
  s.length_km = 0.0;
  EXPECT_THROW(validate(s), ConfigError);
  s = kCal.span(SpanId::A);
  s.loss_db[Band::Nm1550] = -1.0;
  EXPECT_THROW(validate(s), ConfigError);
}

class CalibrationFile : public ::testing::Test {
 protected:
  std::filesystem::path dir = std::filesystem::temp_directory_path() /
                              ("fibertb_cal_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                               ::testing::UnitTest::GetInstance()->current_test_info()->name());
  void SetUp() override { std::filesystem::create_directories(dir); }
  void TearDown() override { std::filesystem::remove_all(dir); }
};

TEST_F(CalibrationFile, SaveLoadRoundTrip) {
  Calibration c = default_calibration();
  c.differential_mismatch = 0.02;
  const auto p = dir / "cal.ini";
  save_calibration(c, p);
  const Calibration back = load_calibration(p);
  EXPECT_DOUBLE_EQ(back.differential_mismatch, 0.02);
  EXPECT_DOUBLE_EQ(back.group_index, c.group_index);
  EXPECT_DOUBLE_EQ(back.span(SpanId::C).length_km, c.span(SpanId::C).length_km);
  EXPECT_DOUBLE_EQ(back.span(SpanId::B).delay_trim_s, c.span(SpanId::B).delay_trim_s);
}

TEST_F(CalibrationFile, ShippedFileMatchesDefaults) {
  const Calibration shipped = load_calibration(FIBERTB_DATA_DIR "/spans.ini");
  const Calibration def = default_calibration();
  EXPECT_NEAR(shipped.group_index, def.group_index, 1e-9);
  for (auto id : {SpanId::A, SpanId::B, SpanId::C, SpanId::D}) {
    EXPECT_NEAR(shipped.span(id).length_km, def.span(id).length_km, 1e-12);
    EXPECT_NEAR(shipped.span(id).polarization.kappa, def.span(id).polarization.kappa, 1e-9);
    EXPECT_NEAR(shipped.span(id).loss_db.at(Band::Nm1350), def.span(id).loss_db.at(Band::Nm1350), 1e-12);
  }
}

TEST_F(CalibrationFile, Errors) {
  EXPECT_THROW(load_calibration(dir / "missing.ini"), IoError);
  std::ofstream(dir / "bad.ini") << "[A]\nlength_km = -3\n";
  EXPECT_THROW(load_calibration(dir / "bad.ini"), ConfigError);
  std::ofstream(dir / "unknown.ini") << "[Z]\nlength_km = 3\n";
  EXPECT_THROW(load_calibration(dir / "unknown.ini"), ConfigError);
  std::ofstream(dir / "garbled.ini") << "[A\nlength_km 3\n";
  EXPECT_THROW(load_calibration(dir / "garbled.ini"), ConfigError);
}

}  // namespace
}  // namespace fibertb
