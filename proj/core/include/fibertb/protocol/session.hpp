#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "fibertb/calibration.hpp"
#include "fibertb/noise.hpp"
#include "fibertb/protocol/ber.hpp"
#include "fibertb/protocol/codebook.hpp"
#include "fibertb/protocol/polarization_control.hpp"
#include "fibertb/protocol/tdi.hpp"
#include "fibertb/report.hpp"

namespace fibertb::protocol {

/// Sequence shared by both sequencers: each cycle is a TDI reference, a
/// polarization reference every `polarization_every` cycles, then a data
/// phase. Every phase opens with a clock command frame.
struct SequenceTiming {
  double tdi_reference = 1.0;
  double polarization_reference = 10.0;
  double data_phase = 30.0;
  std::size_t polarization_every = 1;
  double qubit_period = 100e-6;
  double settle = 20e-6;  // after a frame and after each phase

  /// Offset from a frame's trigger to the start of its phase content.
  double content_offset(std::size_t word_length) const;
};

struct TxConfig {
  SequenceTiming timing;
  std::size_t codebook_words = kCommandCount;
  std::size_t word_length = 8;
  double launch_mean_photon_number = 0.0202;
  bool random_bits = false;  // otherwise |+>, |->, |+>, ...
};

struct RxConfig {
  PiGains gains;
  double lock_rate = 1000.0;        // PI updates per second of reference light
  double reference_noise = 1e-3;    // rms fringe noise per lock sample
  double tdi_visibility = 1.0;
  double tdi_wavelength = 1350e-9;
  double tdi_drift = 0.5e-9;        // path random walk, m / sqrt(s)
  double visibility_ramp = 0.0;     // visibility lost per second, off by default
  double polarization_update_rate = 10.0;  // waveplate iterations per second
  double polarization_max_step = 0.3;      // rad per iteration
  double polarization_tolerance = kPolarizationTolerance;
  double max_decode_failure_fraction = 0.5;
};

struct ChannelModel {
  double loss_db = 0.0;
  double transit_delay = 0.0;
  double timing_jitter = 520e-12;
  double conversion_visibility = 1.0;  // frequency-conversion contrast multiplier
  PolarizationDriftParams polarization{0.0, 2.0};
  double wind_mph = 0.0;
  std::optional<SampledTrace> wind;  // overrides wind_mph when set
  double polarization_step = 1.0;    // walk step, seconds
  std::size_t drop_every_nth_clock_pulse = 0;
  double clock_pulse_loss_probability = 0.0;
};

struct SessionConfig {
  TxConfig tx;
  RxConfig rx;
  ChannelModel channel;
  double duration = 336.0;
};

/// Three-node link (spans A then C at 1350 nm) with visibility 0.954,
/// <n> = 0.0202 at detection, 520 ps jitter and one-way drift statistics.
SessionConfig field_session_config(const Calibration& calibration = default_calibration());
/// Lossless, noiseless, perfectly visible channel.
SessionConfig ideal_session_config();
/// INI session file; absent keys keep field_session_config values.
SessionConfig load_session_config(const std::filesystem::path& path,
                                  const Calibration& calibration = default_calibration());

struct SessionReport {
  std::uint64_t n_pulses_sent = 0;
  std::uint64_t n_gated = 0;  // qubits arriving inside a decoded data window
  std::uint64_t n_detected = 0;
  std::uint64_t n_conclusive = 0;
  double mean_photon_number = 0.0;  // estimated at detection over gated pulses
  double ber_plus = 0.0;
  double ber_minus = 0.0;
  double ber_mean = 0.0;
  double ber_std_error = 0.0;
  double timing_jitter_std = 0.0;
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_decoded = 0;
  std::uint64_t frames_repaired = 0;
  std::uint64_t decode_failures = 0;  // erasures plus frames that never arrived
  std::uint64_t index_slips = 0;
  std::uint64_t bin_assignment_errors = 0;
  std::uint64_t lock_losses = 0;
  std::uint64_t tdi_hold_violations = 0;
  double max_lock_residual = 0.0;            // |qubit phase| after each lock, rad
  double max_post_correction_error = 0.0;    // rad, at the end of each reference window
  double mean_data_polarization_error = 0.0; // rad, averaged over gated qubits

  bool operator==(const SessionReport&) const = default;
};

ReportRecord to_record(std::string name, const SessionReport& report);

struct ClockPulseEvent {
  double time = 0.0;
};

struct ReferenceLightEvent {
  double time = 0.0;
  double duration = 0.0;
};

struct QubitEvent {
  double time = 0.0;  // early-bin centre
  std::uint64_t serial = 0;
  std::uint32_t slot_in_phase = 0;
  std::uint8_t bit = 0;
  double mean_photons = 0.0;  // after channel loss
  Stokes polarization = Stokes::UnitX();
};

/// What travels over the link; times are emission times at the transmitter
/// and arrival times once the channel has carried them.
using LinkEvent = std::variant<ClockPulseEvent, ReferenceLightEvent, QubitEvent>;
double event_time(const LinkEvent& event);

/// Bit carried by qubit `k` of a data phase.
std::uint8_t qubit_bit(std::uint32_t slot_in_phase, bool random_bits, RandomSeed seed);

/// Alice's sequencer. Emits events in nondecreasing time until `duration`,
/// then a closing Idle frame.
class Transmitter {
 public:
  Transmitter(const TxConfig& config, const Codebook& codebook, double duration, RandomSeed seed);

  std::optional<LinkEvent> next();

  std::uint64_t qubits_sent() const noexcept { return qubits_sent_; }
  std::uint64_t frames_sent() const noexcept { return frames_sent_; }

 private:
  void start_phase();

  TxConfig config_;
  const Codebook* codebook_;
  double duration_;
  RandomSeed seed_;

  double cursor_ = 0.0;
  std::uint64_t cycle_ = 0;
  std::size_t phase_in_cycle_ = 0;
  bool finished_ = false;

  std::vector<LinkEvent> pending_;  // frame and reference events of the phase, reversed
  std::uint32_t qubits_in_phase_ = 0;
  std::uint32_t next_qubit_ = 0;
  double qubit_start_ = 0.0;
  std::uint64_t qubits_sent_ = 0;
  std::uint64_t frames_sent_ = 0;
};

/// Polarization state at the fibre output: a Rayleigh walk on a fixed step
/// grid, geodesically interpolated between steps.
class PolarizationProcess {
 public:
  PolarizationProcess(const ChannelModel& model, RandomSeed seed);
  Stokes at(double time);

 private:
  double wind_at(double time) const;

  PolarizationDriftParams params_;
  double step_;
  double wind_mph_;
  std::optional<SampledTrace> wind_;
  PolarizationWalker walker_;
  std::vector<Stokes> states_;
};

/// The deployed link between the sequencers: delay, clock-pulse loss,
/// trigger jitter, photon loss and polarization drift.
class Channel {
 public:
  Channel(const ChannelModel& model, RandomSeed seed);

  /// Arrival of `sent`, or nothing if the link dropped it.
  std::optional<LinkEvent> carry(const LinkEvent& sent);
  Stokes polarization_at(double time) { return polarization_.at(time); }

  const std::vector<double>& trigger_offsets() const noexcept { return jitter_offsets_; }

 private:
  ChannelModel model_;
  Rng rng_;
  RandomSeed seed_;
  PolarizationProcess polarization_;
  std::uint64_t clock_pulses_ = 0;
  std::vector<double> jitter_offsets_;
};

/// One line per sequence event: time_s,event,detail.
class SessionLog {
 public:
  explicit SessionLog(std::ostream& out);
  void write(double time, std::string_view event, std::string_view detail);

 private:
  std::ostream* out_;
};

/// Bob's sequencer: decodes clock frames, locks the TDI during TDI
/// references, corrects polarization during polarization references and
/// measures qubits during data phases.
class Receiver {
 public:
  using LightProbe = std::function<Stokes(double)>;

  Receiver(const RxConfig& config, const SequenceTiming& timing, const Codebook& codebook, double visibility,
           bool random_bits, RandomSeed seed, LightProbe probe, SessionLog* log = nullptr);

  void on_arrival(const LinkEvent& event);
  void on_time(double now);
  std::optional<double> next_deadline() const { return framer_.deadline(); }
  void finish();

  const TdiState& tdi() const noexcept { return tdi_; }
  const PolarizationControllerState& polarization() const noexcept { return polarization_; }
  /// Sent bit and outcome of each gated qubit.
  const std::vector<std::uint8_t>& sent_bits() const noexcept { return sent_bits_; }
  const std::vector<Outcome>& outcomes() const noexcept { return outcomes_; }
  /// Fills the receiver-side fields of `report`.
  void summarize(SessionReport& report) const;

 private:
  enum class Mode { Idle, TdiReference, PolarizationReference, Data };

  void handle_frame(const FrameDecoder::Frame& frame);
  void close_data_window();
  void run_lock(double start, double duration);
  void run_polarization(double start, double duration);
  void measure(const QubitEvent& qubit);
  void advance_environment(double time);
  double visibility_at(double time) const;

  RxConfig config_;
  SequenceTiming timing_;
  const Codebook* codebook_;
  FrameDecoder framer_;
  double base_visibility_;
  bool random_bits_;
  RandomSeed seed_;
  Rng rng_;
  LightProbe probe_;
  SessionLog* log_;

  TdiState tdi_;
  double environment_time_ = 0.0;
  PolarizationControllerState polarization_;

  Mode mode_ = Mode::Idle;
  double content_start_ = 0.0;  // local estimate from the trigger
  double trigger_time_ = 0.0;
  bool data_open_ = false;
  double held_imbalance_ = 0.0;
  double held_integrator_ = 0.0;

  std::vector<std::uint8_t> sent_bits_;
  std::vector<Outcome> outcomes_;
  std::uint64_t n_detected_ = 0;
  std::uint64_t frames_decoded_ = 0;
  std::uint64_t frames_repaired_ = 0;
  std::uint64_t decode_failures_ = 0;
  std::uint64_t index_slips_ = 0;
  std::uint64_t bin_errors_ = 0;
  std::uint64_t lock_losses_ = 0;
  std::uint64_t hold_violations_ = 0;
  double max_lock_residual_ = 0.0;
  double max_post_correction_ = 0.0;
  double polarization_error_sum_ = 0.0;
};

/// Runs Tx, channel and Rx together, delivering events in global time
/// order. Deterministic per seed. Throws DesyncError when decode failures
/// exceed rx.max_decode_failure_fraction of the frames sent.
SessionReport run_session(const TxConfig& tx, const RxConfig& rx, const ChannelModel& channel, double duration,
                          RandomSeed seed, SessionLog* log = nullptr);
SessionReport run_session(const SessionConfig& config, RandomSeed seed, SessionLog* log = nullptr);

}  // namespace fibertb::protocol
