#include <sstream>

#include <gtest/gtest.h>

#include "fibertb/errors.hpp"
#include "fibertb/protocol/session.hpp"

namespace fibertb::protocol {
namespace {

SessionConfig short_ideal() {
  SessionConfig c = ideal_session_config();
  c.duration = 45.0;
  return c;
}

TEST(Session, IdealChannelIsErrorFree) {
  const auto r = run_session(short_ideal(), RandomSeed{1});
  EXPECT_GT(r.n_conclusive, 1000u);
  EXPECT_EQ(r.ber_mean, 0.0);
  EXPECT_EQ(r.decode_failures, 0u);
  EXPECT_EQ(r.index_slips, 0u);
  EXPECT_EQ(r.tdi_hold_violations, 0u);
  EXPECT_EQ(r.frames_decoded, r.frames_sent);
}

TEST(Session, DeterministicForSeed) {
  SessionConfig c = field_session_config();
  c.duration = 45.0;
  const auto a = run_session(c, RandomSeed{5});
  const auto b = run_session(c, RandomSeed{5});
  EXPECT_EQ(a, b);
  const auto other = run_session(c, RandomSeed{6});
  EXPECT_NE(a.n_detected, other.n_detected);
}

TEST(Session, PulsesAreGatedOnlyInsideDataWindows) {
  const auto r = run_session(short_ideal(), RandomSeed{1});
  // 30 s data at 100 us per qubit, minus the settle time at both ends.
  EXPECT_NEAR(static_cast<double>(r.n_pulses_sent), 300000.0, 5.0);
  EXPECT_EQ(r.n_gated, r.n_pulses_sent);
}

TEST(Session, LostClockPulsesAreRepaired) {
  SessionConfig c = short_ideal();
  c.channel.drop_every_nth_clock_pulse = 3;
  const auto r = run_session(c, RandomSeed{2});
  EXPECT_GT(r.frames_repaired + r.decode_failures, 0u);
  EXPECT_EQ(r.index_slips, 0u);
  EXPECT_EQ(r.ber_mean, 0.0);
}

TEST(Session, HeavyClockLossDesynchronises) {
  SessionConfig c = short_ideal();
  c.channel.clock_pulse_loss_probability = 0.9;
  EXPECT_THROW(run_session(c, RandomSeed{3}), DesyncError);
}

TEST(Session, EventLogIsWritten) {
  std::ostringstream out;
  SessionLog log(out);
  run_session(short_ideal(), RandomSeed{1}, &log);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("time_s,event,detail\n", 0), 0u);
  EXPECT_NE(text.find("frame"), std::string::npos);
}

TEST(Session, FieldConfigRecordFields) {
  SessionConfig c = field_session_config();
  c.duration = 45.0;
  const auto rec = to_record("session", run_session(c, RandomSeed{1}));
  EXPECT_EQ(rec.kind, "session");
  EXPECT_TRUE(rec.number("ber_mean"));
  EXPECT_TRUE(rec.number("n_detected"));
  EXPECT_TRUE(rec.number("tdi_hold_violations"));
}

TEST(SessionConfigFile, LoadsShippedDefaults) {
  const auto file = load_session_config(FIBERTB_DATA_DIR "/session.ini");
  const auto preset = field_session_config();
  EXPECT_DOUBLE_EQ(file.duration, preset.duration);
  EXPECT_NEAR(file.channel.loss_db, preset.channel.loss_db, 1e-12);
  EXPECT_NEAR(file.tx.launch_mean_photon_number, preset.tx.launch_mean_photon_number, 1e-12);
  EXPECT_DOUBLE_EQ(file.channel.conversion_visibility, 0.954);
}

}  // namespace
}  // namespace fibertb::protocol
