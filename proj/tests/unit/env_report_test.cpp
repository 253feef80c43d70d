#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fibertb/environment.hpp"
#include "fibertb/errors.hpp"
#include "fibertb/report.hpp"

namespace fibertb {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() /
          (std::string("fibertb_env_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

TEST(Timestamp, IsoAndNumeric) {
  EXPECT_DOUBLE_EQ(*parse_timestamp("1970-01-01T00:00:00Z"), 0.0);
  EXPECT_DOUBLE_EQ(*parse_timestamp("2023-02-22T13:36:00Z"), 1677072960.0);
  EXPECT_DOUBLE_EQ(*parse_timestamp("2023-02-22T14:36:00+01:00"), 1677072960.0);
  EXPECT_DOUBLE_EQ(*parse_timestamp("2023-02-22T13:36:00.25Z"), 1677072960.25);
  EXPECT_DOUBLE_EQ(*parse_timestamp("12.5"), 12.5);
  EXPECT_FALSE(parse_timestamp("yesterday"));
  EXPECT_FALSE(parse_timestamp("2023-13-01T00:00:00Z"));
  EXPECT_EQ(format_timestamp(1677072960.0), "2023-02-22T13:36:00Z");
}

TEST_F(TempDir, ParsesConvertsSkipsAndMerges) {
  const auto p = write("w.csv",
                       "timestamp,value,unit\n"
                       "# comment\n"
                       "2023-02-22T00:00:00Z,10,mph\n"
                       "2023-02-22T00:30:00Z,not-a-number,mph\n"
                       "2023-02-22T01:00:00Z,4.4704,m/s\n"
                       "2023-02-22T01:00:00Z,12,mph\n"
                       "2023-02-22T02:00:00Z,50,F\n");
  const auto r = parse_weather_csv(p);
  EXPECT_EQ(r.series.unit, Unit::Mph);
  ASSERT_EQ(r.series.size(), 2u);
  EXPECT_NEAR(r.series.values[1], 11.0, 1e-9);
  EXPECT_EQ(r.merged_duplicates, 1u);
  EXPECT_EQ(r.skipped_rows, 2u);
  EXPECT_EQ(r.series.label, "w");
}

TEST_F(TempDir, TemperatureInFahrenheit) {
  const auto p = write("t.csv", "timestamp,value,unit\n0,32,F\n60,212,F\n");
  const auto r = parse_weather_csv(p);
  EXPECT_EQ(r.series.unit, Unit::Celsius);
  EXPECT_NEAR(r.series.values[0], 0.0, 1e-12);
  EXPECT_NEAR(r.series.values[1], 100.0, 1e-12);
}

TEST_F(TempDir, CustomColumnsAndErrors) {
  const auto p = write("c.csv", "when,speed,u\n0,3,mph\n10,5,mph\n");
  const auto r = parse_weather_csv(p, ColumnMapping{"when", "speed", "u"});
  EXPECT_EQ(r.series.size(), 2u);
  EXPECT_THROW(parse_weather_csv(p), ParseError);
  EXPECT_THROW(parse_weather_csv(dir / "nope.csv"), IoError);
  EXPECT_THROW(parse_weather_csv(write("e.csv", "timestamp,value,unit\n")), EmptySeries);
}

TEST_F(TempDir, WriteReadRoundTrip) {
  EnvironmentSeries s{{0.5, 1677072960.0, 1677072960.125}, {1.0 / 3.0, 2.0, 7.25}, Unit::Celsius, "x"};
  write_weather_csv(s, dir / "out.csv");
  const auto back = parse_weather_csv(dir / "out.csv").series;
  EXPECT_EQ(back.timestamps, s.timestamps);
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.unit, Unit::Celsius);
}

TEST(Align, InterpolatesOntoGrid) {
  EnvironmentSeries s{{0.0, 10.0}, {0.0, 20.0}, Unit::Mph, ""};
  const auto t = align_to(s, TimeGrid{0.0, 2.5, 5});
  EXPECT_DOUBLE_EQ(t[1], 5.0);
  EXPECT_DOUBLE_EQ(t[4], 20.0);
  EXPECT_EQ(t.unit(), Unit::Mph);
  EXPECT_THROW(align_to(s, TimeGrid{0.0, 2.5, 6}), OutOfRange);
}

TEST(Synthetic, ClippedAndDeterministic) {
  SyntheticWeather shape;
  const auto a = synthetic_weather(shape, Unit::Mph, 0.0, 86400.0, 60.0, RandomSeed{1});
  const auto b = synthetic_weather(shape, Unit::Mph, 0.0, 86400.0, 60.0, RandomSeed{1});
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.size(), 1441u);
  for (double v : a.values) {
    ASSERT_GE(v, shape.min_value);
    ASSERT_LE(v, shape.max_value);
  }
}

TEST(Report, FormatParseRoundTrip) {
  ReportRecord r{"fit", "gaussian", {}};
  r.add("variance", 1.0 / 3.0).add("unit", std::string("Hz^2"));
  const auto line = format_record(r);
  EXPECT_EQ(line, "name=fit kind=gaussian variance=0.3333333333 unit=Hz^2");
  const auto back = parse_record(line);
  EXPECT_EQ(back.name, "fit");
  EXPECT_NEAR(*back.number("variance"), 1.0 / 3.0, 1e-10);
  EXPECT_EQ(*back.text("unit"), "Hz^2");
  EXPECT_THROW(parse_record("kind=x"), ParseError);
  ReportRecord bad{"has space", "k", {}};
  EXPECT_THROW(format_record(bad), InvalidArgument);
}

TEST_F(TempDir, EmitIsStableAndRejectsEmpty) {
  const GaussianFit g{2.5, 0.1, 100, 0.35};
  const std::vector<ReportRecord> records{to_record("g", g, "Hz^2")};
  emit_report(records, dir / "a.txt");
  emit_report(records, dir / "b.txt");
  std::stringstream a;
  std::stringstream b;
  a << std::ifstream(dir / "a.txt").rdbuf();
  b << std::ifstream(dir / "b.txt").rdbuf();
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(load_report(dir / "a.txt").size(), 1u);
  EXPECT_THROW(emit_report({}, dir / "c.txt"), InvalidArgument);
  EXPECT_THROW(emit_report(records, dir / "missing" / "deeper" / "c.txt"), IoError);
}

TEST_F(TempDir, PlotDataHeaderAndRows) {
  write_plot_data(dir / "p.dat", {{"x_s", {1, 2}}, {"y_hz", {3, 4}}});
  std::ifstream in(dir / "p.dat");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "# x_s y_hz");
  double x = 0;
  double y = 0;
  in >> x >> y;
  EXPECT_EQ(x, 1.0);
  EXPECT_EQ(y, 3.0);
  EXPECT_THROW(write_plot_data(dir / "q.dat", {{"x", {1, 2}}, {"y", {3}}}), InvalidArgument);
}

}  // namespace
}  // namespace fibertb
