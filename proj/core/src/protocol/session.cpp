#include "fibertb/protocol/session.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb::protocol {

namespace {

constexpr std::uint64_t kReceiverStream = 1;
constexpr std::uint64_t kChannelStream = 2;
constexpr std::uint64_t kWalkStream = 3;
constexpr std::uint64_t kBitStream = 4;

Rng session_rng(RandomSeed seed, std::uint64_t id) {
  return Rng(CounterEngine(seed, streams::kSession).substream(id));
}

bool bit_identical(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double SequenceTiming::content_offset(std::size_t word_length) const {
  return frame_length(word_length) + settle;
}

double event_time(const LinkEvent& event) {
  return std::visit([](const auto& e) { return e.time; }, event);
}

std::uint8_t qubit_bit(std::uint32_t slot_in_phase, bool random_bits, RandomSeed seed) {
  if (!random_bits) return static_cast<std::uint8_t>(slot_in_phase & 1U);
  const std::uint64_t key = mix64(seed.value ^ mix64(kBitStream + 0x9E3779B97F4A7C15ULL));
  return static_cast<std::uint8_t>(mix64(key + slot_in_phase) & 1U);
}

ReportRecord to_record(std::string name, const SessionReport& r) {
  ReportRecord rec{std::move(name), "session", {}};
  const auto count = [](std::uint64_t v) { return static_cast<double>(v); };
  rec.add("n_pulses_sent", count(r.n_pulses_sent))
      .add("n_gated", count(r.n_gated))
      .add("n_detected", count(r.n_detected))
      .add("n_conclusive", count(r.n_conclusive))
      .add("mean_photon_number", r.mean_photon_number)
      .add("ber_plus", r.ber_plus)
      .add("ber_minus", r.ber_minus)
      .add("ber_mean", r.ber_mean)
      .add("ber_std_error", r.ber_std_error)
      .add("timing_jitter_std_s", r.timing_jitter_std)
      .add("frames_sent", count(r.frames_sent))
      .add("frames_decoded", count(r.frames_decoded))
      .add("frames_repaired", count(r.frames_repaired))
      .add("decode_failures", count(r.decode_failures))
      .add("index_slips", count(r.index_slips))
      .add("bin_assignment_errors", count(r.bin_assignment_errors))
      .add("lock_losses", count(r.lock_losses))
      .add("tdi_hold_violations", count(r.tdi_hold_violations))
      .add("max_lock_residual_rad", r.max_lock_residual)
      .add("max_post_correction_error_rad", r.max_post_correction_error)
      .add("mean_data_polarization_error_rad", r.mean_data_polarization_error);
  return rec;
}

// ---------------------------------------------------------------- Transmitter

Transmitter::Transmitter(const TxConfig& config, const Codebook& codebook, double duration, RandomSeed seed)
    : config_(config), codebook_(&codebook), duration_(duration), seed_(seed) {
  if (!(duration > 0.0)) throw InvalidArgument(fmt::format("session duration must be positive, got {}", duration));
  const auto& t = config_.timing;
  if (!(t.tdi_reference > 0.0) || !(t.polarization_reference > 0.0) || !(t.data_phase > 0.0) ||
      !(t.qubit_period > 0.0) || !(t.settle >= 0.0) || t.polarization_every == 0) {
    throw ConfigError("sequence timings must be positive");
  }
  if (t.qubit_period < 2.0 * kBinSpacing) throw ConfigError("qubit period is shorter than two time bins");
  if (!(config_.launch_mean_photon_number >= 0.0)) throw ConfigError("launch photon number must be non-negative");
}

void Transmitter::start_phase() {
  const auto& t = config_.timing;
  Command command = Command::Idle;
  if (cursor_ >= duration_) {
    finished_ = true;
  } else if (phase_in_cycle_ == 0) {
    command = Command::TdiReference;
  } else if (phase_in_cycle_ == 1 && cycle_ % t.polarization_every == 0) {
    command = Command::PolarizationReference;
  } else {
    command = Command::DataTransmission;
  }

  const std::size_t length = codebook_->word_length();
  const double content = cursor_ + t.content_offset(length);
  std::vector<LinkEvent> events;
  for (const double offset : frame_pulse_offsets(codebook_->for_command(command).symbols)) {
    events.emplace_back(ClockPulseEvent{cursor_ + offset});
  }
  ++frames_sent_;

  double phase_length = 0.0;
  switch (command) {
    case Command::TdiReference:
      phase_length = t.tdi_reference;
      events.emplace_back(ReferenceLightEvent{content, phase_length});
      phase_in_cycle_ = 1;
      break;
    case Command::PolarizationReference:
      phase_length = t.polarization_reference;
      events.emplace_back(ReferenceLightEvent{content, phase_length});
      phase_in_cycle_ = 2;
      break;
    case Command::DataTransmission:
      phase_length = t.data_phase;
      qubits_in_phase_ = static_cast<std::uint32_t>(std::floor(t.data_phase / t.qubit_period + 1e-9));
      next_qubit_ = 0;
      qubit_start_ = content;
      phase_in_cycle_ = 0;
      ++cycle_;
      break;
    case Command::Idle:
      break;
  }
  std::reverse(events.begin(), events.end());
  pending_ = std::move(events);
  cursor_ = content + phase_length + t.settle;
}

std::optional<LinkEvent> Transmitter::next() {
  while (true) {
    if (!pending_.empty()) {
      LinkEvent e = pending_.back();
      pending_.pop_back();
      return e;
    }
    if (next_qubit_ < qubits_in_phase_) {
      const std::uint32_t k = next_qubit_++;
      QubitEvent q;
      q.time = qubit_start_ + static_cast<double>(k) * config_.timing.qubit_period;
      q.serial = qubits_sent_++;
      q.slot_in_phase = k;
      q.bit = qubit_bit(k, config_.random_bits, seed_);
      q.mean_photons = config_.launch_mean_photon_number;
      return q;
    }
    qubits_in_phase_ = 0;
    next_qubit_ = 0;
    if (finished_) return std::nullopt;
    start_phase();
  }
}

// -------------------------------------------------------- PolarizationProcess

PolarizationProcess::PolarizationProcess(const ChannelModel& model, RandomSeed seed)
    : params_(model.polarization),
      step_(model.polarization_step),
      wind_mph_(model.wind_mph),
      wind_(model.wind),
      walker_(model.polarization, Stokes::UnitX(), seed, streams::kPolarizationWalk) {
  if (!(step_ > 0.0)) throw ConfigError("polarization step must be positive");
  if (!(wind_mph_ >= 0.0)) throw NegativeWind(fmt::format("wind speed {} mph is negative", wind_mph_));
  if (wind_) require_unit(wind_->unit(), Unit::Mph, "channel wind");
  states_.push_back(walker_.state());
}

double PolarizationProcess::wind_at(double time) const {
  if (!wind_) return wind_mph_;
  const auto& w = *wind_;
  const double u = std::clamp((time - w.t0()) / w.dt(), 0.0, static_cast<double>(w.size() - 1));
  const auto i = static_cast<std::size_t>(std::floor(u));
  if (i + 1 >= w.size()) return w[w.size() - 1];
  return w[i] + (u - static_cast<double>(i)) * (w[i + 1] - w[i]);
}

Stokes PolarizationProcess::at(double time) {
  const double u = std::max(0.0, time / step_);
  const auto i = static_cast<std::size_t>(std::floor(u));
  while (states_.size() < i + 2) {
    const double t = static_cast<double>(states_.size() - 1) * step_;
    states_.push_back(walker_.step(wind_at(t), step_));
  }
  return slerp(states_[i], states_[i + 1], u - static_cast<double>(i));
}

// -------------------------------------------------------------------- Channel

Channel::Channel(const ChannelModel& model, RandomSeed seed)
    : model_(model),
      rng_(session_rng(seed, kChannelStream)),
      seed_(seed),
      polarization_(model, RandomSeed{CounterEngine(seed, streams::kSession).substream(kWalkStream)()}) {
  if (!(model_.loss_db >= 0.0)) throw ConfigError("channel loss must be non-negative");
  if (!(model_.transit_delay >= 0.0)) throw ConfigError("transit delay must be non-negative");
  if (!(model_.timing_jitter >= 0.0)) throw ConfigError("timing jitter must be non-negative");
  if (!(model_.conversion_visibility >= 0.0 && model_.conversion_visibility <= 1.0)) {
    throw ConfigError("conversion visibility must lie in [0, 1]");
  }
  if (!(model_.clock_pulse_loss_probability >= 0.0 && model_.clock_pulse_loss_probability <= 1.0)) {
    throw ConfigError("clock pulse loss probability must lie in [0, 1]");
  }
}

std::optional<LinkEvent> Channel::carry(const LinkEvent& sent) {
  if (const auto* pulse = std::get_if<ClockPulseEvent>(&sent)) {
    ++clock_pulses_;
    if (model_.drop_every_nth_clock_pulse > 0 && clock_pulses_ % model_.drop_every_nth_clock_pulse == 0) {
      return std::nullopt;
    }
    if (model_.clock_pulse_loss_probability > 0.0 && rng_.uniform() < model_.clock_pulse_loss_probability) {
      return std::nullopt;
    }
    const double offset = model_.timing_jitter > 0.0 ? model_.timing_jitter * rng_.normal() : 0.0;
    jitter_offsets_.push_back(offset);
    return ClockPulseEvent{pulse->time + model_.transit_delay + offset};
  }
  if (const auto* ref = std::get_if<ReferenceLightEvent>(&sent)) {
    return ReferenceLightEvent{ref->time + model_.transit_delay, ref->duration};
  }
  QubitEvent q = std::get<QubitEvent>(sent);
  q.time += model_.transit_delay;
  q.mean_photons *= std::pow(10.0, -model_.loss_db / 10.0);
  q.polarization = polarization_.at(q.time);
  return q;
}

// ----------------------------------------------------------------- SessionLog

SessionLog::SessionLog(std::ostream& out) : out_(&out) { *out_ << "time_s,event,detail\n"; }

void SessionLog::write(double time, std::string_view event, std::string_view detail) {
  *out_ << fmt::format("{:.9f},{},{}\n", time, event, detail);
}

// ------------------------------------------------------------------- Receiver

Receiver::Receiver(const RxConfig& config, const SequenceTiming& timing, const Codebook& codebook, double visibility,
                   bool random_bits, RandomSeed seed, LightProbe probe, SessionLog* log)
    : config_(config),
      timing_(timing),
      codebook_(&codebook),
      framer_(codebook),
      base_visibility_(visibility),
      random_bits_(random_bits),
      seed_(seed),
      rng_(session_rng(seed, kReceiverStream)),
      probe_(std::move(probe)),
      log_(log) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw ConfigError("visibility must lie in [0, 1]");
  if (!(config_.lock_rate > 0.0) || !(config_.polarization_update_rate > 0.0)) {
    throw ConfigError("lock and polarization update rates must be positive");
  }
  if (!(config_.reference_noise >= 0.0) || !(config_.tdi_drift >= 0.0) || !(config_.visibility_ramp >= 0.0)) {
    throw ConfigError("receiver noise terms must be non-negative");
  }
  tdi_.wavelength = config_.tdi_wavelength;
  tdi_.visibility = base_visibility_;
  tdi_.path_imbalance = config_.tdi_wavelength * rng_.uniform();
  validate(tdi_);
  polarization_.tolerance = config_.polarization_tolerance;
  polarization_.max_step = config_.polarization_max_step;
}

double Receiver::visibility_at(double time) const {
  return std::clamp(base_visibility_ - config_.visibility_ramp * time, 0.0, 1.0);
}

void Receiver::advance_environment(double time) {
  if (time <= environment_time_) return;
  if (config_.tdi_drift > 0.0) {
    tdi_.path_drift += config_.tdi_drift * std::sqrt(time - environment_time_) * rng_.normal();
  }
  environment_time_ = time;
  tdi_.visibility = visibility_at(time);
}

void Receiver::on_time(double now) {
  if (auto frame = framer_.on_time(now)) handle_frame(*frame);
}

void Receiver::on_arrival(const LinkEvent& event) {
  const double t = event_time(event);
  on_time(t);
  if (std::holds_alternative<ClockPulseEvent>(event)) {
    if (auto frame = framer_.on_pulse(t)) handle_frame(*frame);
    return;
  }
  if (const auto* ref = std::get_if<ReferenceLightEvent>(&event)) {
    if (mode_ == Mode::TdiReference) {
      run_lock(ref->time, ref->duration);
    } else if (mode_ == Mode::PolarizationReference) {
      run_polarization(ref->time, ref->duration);
    } else if (log_) {
      log_->write(t, "reference-ignored", "no matching command");
    }
    return;
  }
  const auto& qubit = std::get<QubitEvent>(event);
  if (data_open_) measure(qubit);
}

void Receiver::close_data_window() {
  if (!data_open_) return;
  data_open_ = false;
  if (!bit_identical(tdi_.path_imbalance, held_imbalance_) || !bit_identical(tdi_.lock_integrator, held_integrator_)) {
    ++hold_violations_;
  }
}

void Receiver::handle_frame(const FrameDecoder::Frame& frame) {
  close_data_window();
  mode_ = Mode::Idle;
  const DecodeResult decoded = frame.valid ? decode_command(frame.symbols, *codebook_) : DecodeResult{};
  if (decoded.erasure()) {
    ++decode_failures_;
    if (log_) log_->write(frame.trigger_time, "frame", frame.valid ? "erasure" : "framing-violation");
    return;
  }
  ++frames_decoded_;
  if (decoded.repaired) ++frames_repaired_;
  const auto command = codebook_->words()[*decoded.code].meaning().value_or(Command::Idle);
  if (log_) log_->write(frame.trigger_time, "frame", fmt::format("{}{}", to_string(command), decoded.repaired ? " repaired" : ""));

  trigger_time_ = frame.trigger_time;
  content_start_ = trigger_time_ + timing_.content_offset(codebook_->word_length());
  switch (command) {
    case Command::TdiReference: mode_ = Mode::TdiReference; break;
    case Command::PolarizationReference: mode_ = Mode::PolarizationReference; break;
    case Command::DataTransmission:
      mode_ = Mode::Data;
      data_open_ = true;
      held_imbalance_ = tdi_.path_imbalance;
      held_integrator_ = tdi_.lock_integrator;
      break;
    case Command::Idle: break;
  }
}

void Receiver::run_lock(double start, double duration) {
  const auto steps = static_cast<std::size_t>(std::floor(duration * config_.lock_rate + 1e-9));
  const double offset = quadrature_offset(tdi_);
  for (std::size_t i = 0; i < steps; ++i) {
    advance_environment(start + (static_cast<double>(i) + 1.0) / config_.lock_rate);
    double signal = reference_fringe(tdi_, offset);
    if (config_.reference_noise > 0.0) signal += config_.reference_noise * rng_.normal();
    try {
      tdi_ = tdi_lock_step(signal, tdi_, config_.gains);
    } catch (const LockLost& e) {
      ++lock_losses_;
      if (log_) log_->write(environment_time_, "lock-lost", e.what());
      tdi_.unlocked_steps = 0;
      tdi_.lock_integrator = 0.0;
    }
  }
  const double residual = std::abs(tdi_phase(tdi_));
  max_lock_residual_ = std::max(max_lock_residual_, residual);
  if (log_) log_->write(start + duration, "tdi-locked", fmt::format("residual_rad={:.6g}", residual));
}

void Receiver::run_polarization(double start, double duration) {
  const auto steps = static_cast<std::size_t>(std::floor(duration * config_.polarization_update_rate + 1e-9));
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = start + static_cast<double>(i) / config_.polarization_update_rate;
    const Stokes measured = (polarization_.compensation * probe_(t)).normalized();
    polarization_ = polarization_correct(polarization_, measured).second;
  }
  const double end = start + duration;
  const Stokes final_state = (polarization_.compensation * probe_(end)).normalized();
  polarization_.current = final_state;
  const double error = great_circle_angle(final_state, polarization_.target);
  max_post_correction_ = std::max(max_post_correction_, error);
  if (log_) log_->write(end, "polarization-corrected", fmt::format("error_rad={:.6g}", error));
}

void Receiver::measure(const QubitEvent& qubit) {
  advance_environment(qubit.time);
  const double elapsed = qubit.time - content_start_;
  const auto slot = std::llround(elapsed / timing_.qubit_period);
  if (slot < 0 || static_cast<std::uint64_t>(slot) != qubit.slot_in_phase) ++index_slips_;
  const double expected = content_start_ + static_cast<double>(slot) * timing_.qubit_period;
  if (bin_assignment_shift(qubit.time - expected) != 0) ++bin_errors_;
  const std::uint8_t believed = qubit_bit(static_cast<std::uint32_t>(std::max<long long>(slot, 0)), random_bits_, seed_);

  const Stokes arriving = (polarization_.compensation * qubit.polarization).normalized();
  const double pol_error = great_circle_angle(arriving, polarization_.target);
  polarization_error_sum_ += pol_error;
  const double pol_efficiency = 0.5 * (1.0 + std::cos(pol_error));

  const SlotProbabilities p = slot_probabilities(TimeBinQubit::from_bit(qubit.bit), tdi_);
  const std::uint32_t photons = rng_.poisson(qubit.mean_photons * pol_efficiency);
  bool click0 = false;
  bool click1 = false;
  for (std::uint32_t k = 0; k < photons; ++k) {
    const double u = rng_.uniform();
    if (u < p.early) continue;
    if (u < p.early + p.middle_port0) {
      click0 = true;
    } else if (u < p.early + p.middle()) {
      click1 = true;
    }
  }
  if (photons > 0) ++n_detected_;
  Outcome outcome = Outcome::NoDetection;
  if (click0 && click1) {
    outcome = Outcome::Inconclusive;
  } else if (click0) {
    outcome = Outcome::Bit0;
  } else if (click1) {
    outcome = Outcome::Bit1;
  }
  sent_bits_.push_back(believed);
  outcomes_.push_back(outcome);
}

void Receiver::finish() {
  on_time(std::numeric_limits<double>::infinity());
  close_data_window();
}

void Receiver::summarize(SessionReport& report) const {
  report.n_gated = outcomes_.size();
  report.n_detected = n_detected_;
  report.n_conclusive = static_cast<std::uint64_t>(std::count_if(outcomes_.begin(), outcomes_.end(), [](Outcome o) {
    return o == Outcome::Bit0 || o == Outcome::Bit1;
  }));
  if (report.n_gated > 0 && n_detected_ < report.n_gated) {
    report.mean_photon_number =
        -std::log1p(-static_cast<double>(n_detected_) / static_cast<double>(report.n_gated));
  }
  const BerResult ber = compute_ber(sent_bits_, outcomes_);
  report.ber_plus = ber.ber_plus;
  report.ber_minus = ber.ber_minus;
  report.ber_mean = ber.ber_mean;
  report.ber_std_error = ber.std_error_mean;
  report.frames_decoded = frames_decoded_;
  report.frames_repaired = frames_repaired_;
  report.decode_failures = decode_failures_;
  report.index_slips = index_slips_;
  report.bin_assignment_errors = bin_errors_;
  report.lock_losses = lock_losses_;
  report.tdi_hold_violations = hold_violations_;
  report.max_lock_residual = max_lock_residual_;
  report.max_post_correction_error = max_post_correction_;
  report.mean_data_polarization_error =
      outcomes_.empty() ? 0.0 : polarization_error_sum_ / static_cast<double>(outcomes_.size());
}

// ------------------------------------------------------------------ Scheduler

SessionReport run_session(const TxConfig& tx_config, const RxConfig& rx_config, const ChannelModel& model,
                          double duration, RandomSeed seed, SessionLog* log) {
  const Codebook codebook = build_codebook(tx_config.codebook_words, tx_config.word_length);
  if (codebook.size() < kCommandCount) {
    throw ConfigError(fmt::format("codebook needs {} words to carry every command", kCommandCount));
  }
  Transmitter tx(tx_config, codebook, duration, seed);
  Channel channel(model, seed);
  Receiver rx(rx_config, tx_config.timing, codebook, rx_config.tdi_visibility * model.conversion_visibility,
              tx_config.random_bits, seed, [&channel](double t) { return channel.polarization_at(t); }, log);

  struct InFlight {
    double time;
    std::uint64_t seq;
    LinkEvent event;
    bool operator>(const InFlight& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };
  std::priority_queue<InFlight, std::vector<InFlight>, std::greater<>> in_flight;
  std::uint64_t seq = 0;
  std::optional<LinkEvent> emission = tx.next();

  constexpr double kNever = std::numeric_limits<double>::infinity();
  while (emission || !in_flight.empty()) {
    const double t_emit = emission ? event_time(*emission) : kNever;
    const double t_arrive = in_flight.empty() ? kNever : in_flight.top().time;
    const double t_deadline = rx.next_deadline().value_or(kNever);
    if (t_emit <= t_arrive && t_emit <= t_deadline) {
      if (auto arrival = channel.carry(*emission)) {
        in_flight.push({event_time(*arrival), seq++, std::move(*arrival)});
      }
      emission = tx.next();
    } else if (t_deadline < t_arrive) {
      rx.on_time(t_deadline);
    } else {
      const LinkEvent event = in_flight.top().event;
      in_flight.pop();
      rx.on_arrival(event);
    }
  }
  rx.finish();

  SessionReport report;
  report.n_pulses_sent = tx.qubits_sent();
  report.frames_sent = tx.frames_sent();
  report.timing_jitter_std = sample_std(channel.trigger_offsets());
  rx.summarize(report);
  // Frames that lost every pulse never reach the decoder but are failures all the same.
  const std::uint64_t seen = report.frames_decoded + report.decode_failures;
  if (report.frames_sent > seen) report.decode_failures += report.frames_sent - seen;
  if (static_cast<double>(report.decode_failures) >
      rx_config.max_decode_failure_fraction * static_cast<double>(report.frames_sent)) {
    throw DesyncError(fmt::format("{} of {} clock frames failed to decode", report.decode_failures,
                                  report.frames_sent));
  }
  return report;
}

SessionReport run_session(const SessionConfig& config, RandomSeed seed, SessionLog* log) {
  return run_session(config.tx, config.rx, config.channel, config.duration, seed, log);
}

}  // namespace fibertb::protocol
