#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "fibertb/errors.hpp"
#include "fibertb/protocol/ber.hpp"
#include "fibertb/protocol/codebook.hpp"
#include "fibertb/protocol/polarization_control.hpp"
#include "fibertb/protocol/qubit.hpp"
#include "fibertb/protocol/tdi.hpp"
#include "oracles.hpp"

namespace fibertb::protocol {
namespace {

oracle::Word to_mask(const SymbolWord& w) {
  oracle::Word m = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == Symbol::Pulse) m |= oracle::Word{1} << i;
  }
  return m;
}

TEST(Qubit, StatesAreNormalised) {
  for (const auto& q : {TimeBinQubit::plus(), TimeBinQubit::minus(), TimeBinQubit::early(), TimeBinQubit::late()}) {
    EXPECT_NO_THROW(validate(q));
  }
  EXPECT_THROW(validate(TimeBinQubit{1.0, 1.0, 0.0}), InvalidArgument);
  EXPECT_DOUBLE_EQ(TimeBinQubit::from_bit(1).relative_phase, std::numbers::pi);
}

TEST(Qubit, CarvedBinsCarryAmplitudeSquared) {
  const auto w = carve_time_bins(TimeBinQubit::plus(), 0.0);
  double early = 0.0;
  double late = 0.0;
  const double mid = 0.5 * kBinSpacing;
  for (std::size_t i = 0; i < w.intensity.size(); ++i) {
    (w.intensity.time(i) < mid ? early : late) += w.intensity[i] * w.intensity.dt();
  }
  // Lorentzian tails beyond the carved window and the midpoint split cost a few percent.
  EXPECT_NEAR(early, 0.5, 0.05);
  EXPECT_NEAR(late, 0.5, 0.05);
  EXPECT_THROW(carve_time_bins(TimeBinQubit::plus(), 0.0, 2e-9), RateTooLow);
}

TEST(Qubit, LorentzianHasUnitArea) {
  double area = 0.0;
  const double dt = 1e-3;
  for (double t = -2000.0; t < 2000.0; t += dt) area += lorentzian(t, 1.0) * dt;
  EXPECT_NEAR(area, 1.0, 1e-3);
  EXPECT_NEAR(lorentzian(0.5, 1.0), 0.5 * lorentzian(0.0, 1.0), 1e-12);
}

TEST(Qubit, JitterShiftsWaveformDeterministically) {
  const auto w = carve_time_bins(TimeBinQubit::early(), 1e-6);
  const auto j = apply_timing_jitter(w, 520e-12, RandomSeed{3}, 17);
  EXPECT_NEAR(j.early_center - w.early_center, timing_offset(520e-12, RandomSeed{3}, 17), 1e-18);
  EXPECT_NEAR(j.intensity.t0() - w.intensity.t0(), j.early_center - w.early_center, 1e-18);
}

TEST(Qubit, BinAssignmentShift) {
  EXPECT_EQ(bin_assignment_shift(0.0), 0);
  EXPECT_EQ(bin_assignment_shift(0.49 * kBinSpacing), 0);
  EXPECT_EQ(bin_assignment_shift(0.51 * kBinSpacing), 1);
  EXPECT_EQ(bin_assignment_shift(-0.51 * kBinSpacing), -1);
  EXPECT_EQ(count_bin_assignment_errors(0.3 * kBinSpacing, 100000, RandomSeed{1}) > 0, true);
  // A tenth of a percent of trials cross half a bin at sigma = bin / 6.6.
  const double sigma = kBinSpacing / 6.6;
  const double p = oracle::gaussian_two_sided_tail(0.5 * kBinSpacing, sigma);
  const double n = 1e6;
  const auto errors = static_cast<double>(count_bin_assignment_errors(sigma, 1000000, RandomSeed{2}));
  EXPECT_NEAR(errors, p * n, 5.0 * std::sqrt(p * n));
}

TEST(Codebook, DefaultBookIsValidByIndependentCheck) {
  const auto book = build_codebook(kCommandCount, 8);
  ASSERT_EQ(book.size(), kCommandCount);
  std::vector<oracle::Word> masks;
  for (const auto& w : book.words()) {
    EXPECT_GE(weight(w.symbols), 2u);
    masks.push_back(to_mask(w.symbols));
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (std::size_t j = i + 1; j < masks.size(); ++j) EXPECT_GE(oracle::popcount(masks[i] ^ masks[j]), 2);
  }
  EXPECT_TRUE(oracle::single_loss_unambiguous(masks));
  EXPECT_TRUE(is_valid_codebook(book));
}

TEST(Codebook, ValidityCheckAgreesWithOracleOnRandomBooks) {
  Rng rng(RandomSeed{12}, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ClockCommandWord> words;
    std::set<std::uint64_t> used;
    while (words.size() < 3) {
      const std::uint64_t bits = rng.engine()() & 0x3F;
      if (!used.insert(bits).second) continue;
      words.push_back({word_from_bits(bits, 6), static_cast<std::uint32_t>(words.size())});
    }
    std::vector<oracle::Word> masks;
    bool distance_ok = true;
    for (std::size_t i = 0; i < words.size(); ++i) {
      masks.push_back(to_mask(words[i].symbols));
      for (std::size_t j = 0; j < i; ++j) distance_ok &= oracle::popcount(masks[i] ^ masks[j]) >= 2;
    }
    const bool expected = distance_ok && oracle::single_loss_unambiguous(masks);
    EXPECT_EQ(is_valid_codebook(Codebook(words, 6)), expected) << "trial " << trial;
  }
}

TEST(Codebook, CapacityExceeded) {
  EXPECT_THROW(build_codebook(50, 4), CapacityExceeded);
  EXPECT_THROW(build_codebook(2, kMaxWordLength + 1), CapacityExceeded);
}

TEST(Codebook, DecodeExactRepairAndErasure) {
  const auto book = build_codebook(kCommandCount, 8);
  for (const auto& w : book.words()) {
    const auto exact = decode_command(w.symbols, book);
    ASSERT_EQ(exact.code, w.code);
    EXPECT_FALSE(exact.repaired);
    for (const auto& lost : single_pulse_deletions(w.symbols)) {
      const auto r = decode_command(lost, book);
      EXPECT_TRUE(r.erasure() || (r.code == w.code && r.repaired));
    }
  }
  EXPECT_TRUE(decode_command(SymbolWord(8, Symbol::NoPulse), book).erasure());
  EXPECT_THROW(decode_command(SymbolWord(7, Symbol::NoPulse), book), LengthMismatch);
}

TEST(Codebook, FrameDecoderReadsFramedWord) {
  const auto book = build_codebook(kCommandCount, 8);
  const auto& word = book.for_command(Command::PolarizationReference);
  FrameDecoder decoder(book);
  std::optional<FrameDecoder::Frame> frame;
  for (double t : frame_pulse_offsets(word.symbols)) {
    ASSERT_FALSE(decoder.on_pulse(5.0 + t));
  }
  ASSERT_TRUE(decoder.deadline());
  EXPECT_NEAR(*decoder.deadline(), 5.0 + frame_length(8), 1e-12);
  frame = decoder.on_time(5.0 + frame_length(8) + 1e-9);
  ASSERT_TRUE(frame);
  EXPECT_TRUE(frame->valid);
  EXPECT_EQ(frame->symbols, word.symbols);
  EXPECT_DOUBLE_EQ(frame->trigger_time, 5.0);
}

TEST(Codebook, FrameDecoderRejectsPulseInGuard) {
  const auto book = build_codebook(kCommandCount, 8);
  FrameDecoder decoder(book);
  decoder.on_pulse(1.0);
  decoder.on_pulse(1.0 + 0.5 * frame_guard(8));
  const auto frame = decoder.on_time(1.0 + frame_length(8) + 1e-9);
  ASSERT_TRUE(frame);
  EXPECT_FALSE(frame->valid);
}

TdiState locked_reference() {
  TdiState t;
  t.visibility = 1.0;
  return t;
}

TEST(Tdi, QuadratureOffsetPutsQubitAtFringeMaximum) {
  TdiState t = locked_reference();
  // Reference at quadrature (phi_ref = pi / 2) means the qubit phase is zero.
  t.path_imbalance = 0.0;
  EXPECT_NEAR(reference_phase(t, quadrature_offset(t)), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(reference_fringe(t, quadrature_offset(t)), 0.5, 1e-12);
  const auto plus = slot_probabilities(TimeBinQubit::plus(), t);
  EXPECT_NEAR(plus.early, 0.25, 1e-12);
  EXPECT_NEAR(plus.late, 0.25, 1e-12);
  EXPECT_NEAR(plus.middle_port0, 0.5, 1e-12);
  EXPECT_NEAR(plus.middle_port1, 0.0, 1e-12);
  const auto minus = slot_probabilities(TimeBinQubit::minus(), t);
  EXPECT_NEAR(minus.middle_port1, 0.5, 1e-12);
}

TEST(Tdi, VisibilityLimitsContrast) {
  TdiState t = locked_reference();
  t.visibility = 0.9;
  const auto p = slot_probabilities(TimeBinQubit::plus(), t);
  EXPECT_NEAR(p.middle_port1 / p.middle(), (1.0 - 0.9) / 2.0, 1e-12);
}

TEST(Tdi, MeasureMatchesProbabilities) {
  TdiState t = locked_reference();
  t.path_imbalance = 0.1 * t.wavelength;
  const auto p = slot_probabilities(TimeBinQubit::plus(), t);
  const auto c = tdi_measure(TimeBinQubit::plus(), t, 400000, 0.5, RandomSeed{4});
  const double photons = static_cast<double>(c.early + c.middle() + c.late);
  EXPECT_NEAR(c.middle_port1 / photons, p.middle_port1, 0.005);
  EXPECT_NEAR(c.early / photons, p.early, 0.005);
  TdiState wrong = t;
  wrong.delay = 100e-9;
  EXPECT_THROW(tdi_measure(TimeBinQubit::plus(), wrong, 10, 0.5, RandomSeed{4}), DelayMismatch);
}

TEST(Tdi, LockConvergesFromAnyStart) {
  for (double start : {0.05, 0.3, 0.45, 0.7, 0.95}) {
    TdiState t = locked_reference();
    t.path_imbalance = start * t.wavelength;
    const PiGains gains;
    for (int k = 0; k < 1000; ++k) t = tdi_lock_step(reference_fringe(t, quadrature_offset(t)), t, gains);
    EXPECT_NEAR(tdi_phase(t), 0.0, 1e-6) << "start " << start;
  }
}

TEST(Tdi, LockLostAfterDwell) {
  TdiState t = locked_reference();
  PiGains gains;
  gains.kp = 0.0;
  gains.ki = 0.0;
  gains.lost_dwell_steps = 10;
  for (int k = 0; k < 10; ++k) t = tdi_lock_step(1.0, t, gains);
  EXPECT_THROW(tdi_lock_step(1.0, t, gains), LockLost);
}

TEST(Tdi, TenNanometreDriftIsPercentLevel) {
  const double phase = phase_error_for_path_drift(10e-9, 1350e-9);
  EXPECT_NEAR(phase, 2.0 * std::numbers::pi * 10.0 / 1350.0, 1e-15);
  const double error = (1.0 - std::cos(phase)) / 2.0;
  EXPECT_GT(error, 1e-4);
  EXPECT_LT(error, 1e-3);
}

TEST(PolarizationControl, ConvergesAndComposes) {
  PolarizationControllerState s;
  s.max_step = 0.3;
  const Stokes drifted = Stokes(0.0, 1.0, 1.0).normalized();
  Stokes measured = drifted;
  for (int i = 0; i < 20; ++i) {
    auto [cmd, next] = polarization_correct(s, measured);
    s = next;
    EXPECT_LE(cmd.angle, 0.3 + 1e-12);
    measured = s.compensation * drifted;
  }
  EXPECT_LT(great_circle_angle(s.compensation * drifted, s.target), 1e-9);
}

TEST(PolarizationControl, InsideToleranceStillCorrects) {
  PolarizationControllerState s;
  const Stokes near = Stokes(1.0, 0.05, 0.0).normalized();
  const auto [cmd, next] = polarization_correct(s, near);
  EXPECT_NEAR(cmd.angle, great_circle_angle(near, s.target), 1e-12);
  EXPECT_LT(next.error(), 1e-9);
}

TEST(Ber, CountsPerStateAndExcludesInconclusive) {
  const std::vector<std::uint8_t> sent{0, 0, 0, 0, 1, 1, 1, 1};
  const std::vector<Outcome> got{Outcome::Bit0, Outcome::Bit1, Outcome::NoDetection, Outcome::Bit0,
                                 Outcome::Bit1, Outcome::Bit1, Outcome::Inconclusive, Outcome::Bit1};
  const auto r = compute_ber(sent, got);
  EXPECT_EQ(r.detected_plus, 3u);
  EXPECT_EQ(r.detected_minus, 3u);
  EXPECT_NEAR(r.ber_plus, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.ber_minus, 0.0, 1e-15);
  EXPECT_NEAR(r.ber_mean, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(r.std_error_plus, std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 3.0), 1e-15);
  EXPECT_THROW(compute_ber(sent, std::vector<Outcome>(3, Outcome::Bit0)), Misaligned);
}

}  // namespace
}  // namespace fibertb::protocol
