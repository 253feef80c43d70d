#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace fibertb::protocol {

enum class Symbol : std::uint8_t { NoPulse = 0, Pulse = 1 };
using SymbolWord = std::vector<Symbol>;

/// Sequence phase a clock command announces.
enum class Command : std::uint8_t { DataTransmission = 0, PolarizationReference = 1, TdiReference = 2, Idle = 3 };

inline constexpr std::size_t kCommandCount = 4;
std::string_view to_string(Command command);

inline constexpr double kSlotPeriod = 200e-9;     // 5 MHz word symbols
inline constexpr double kPulseDuration = 100e-9;  // each clock pulse

struct ClockCommandWord {
  SymbolWord symbols;
  std::uint32_t code = 0;  // position in the codebook

  std::optional<Command> meaning() const;
};

class Codebook {
 public:
  Codebook(std::vector<ClockCommandWord> words, std::size_t word_length);

  const std::vector<ClockCommandWord>& words() const noexcept { return words_; }
  std::size_t word_length() const noexcept { return word_length_; }
  std::size_t size() const noexcept { return words_.size(); }
  const ClockCommandWord& for_command(Command command) const;

 private:
  std::vector<ClockCommandWord> words_;
  std::size_t word_length_;
};

std::size_t weight(const SymbolWord& word);
std::size_t hamming_distance(const SymbolWord& a, const SymbolWord& b);
/// Every word obtained by turning exactly one pulse into a no-pulse.
std::vector<SymbolWord> single_pulse_deletions(const SymbolWord& word);
SymbolWord word_from_bits(std::uint64_t bits, std::size_t length);

/// Pairwise Hamming distance >= 2 and no received word reachable by a
/// single lost pulse from two different codewords (or equal to a codeword).
bool is_valid_codebook(const Codebook& codebook);

inline constexpr std::size_t kMaxWordLength = 24;

/// Lexicographic greedy codebook over words of weight >= 2, accepting a word
/// when it keeps the codebook valid. Throws CapacityExceeded when fewer than
/// n_words fit.
Codebook build_codebook(std::size_t n_words, std::size_t word_length);

struct DecodeResult {
  std::optional<std::uint32_t> code;  // empty on erasure
  bool repaired = false;              // recovered by re-inserting a lost pulse

  bool erasure() const { return !code.has_value(); }
};

/// Exact match, else the unique codeword reachable by re-inserting one lost
/// pulse, else an erasure. Throws LengthMismatch on a wrong-length word.
DecodeResult decode_command(const SymbolWord& received, const Codebook& codebook);

/// Pulse offsets of a framed clock word relative to its trigger pulse
/// (the trigger itself at 0 is included first).
std::vector<double> frame_pulse_offsets(const SymbolWord& word);
/// Quiet time between the trigger and the first word slot.
double frame_guard(std::size_t word_length);
/// Offset of the end of the last word slot.
double frame_length(std::size_t word_length);

/// Receiver-side framing: the first pulse after a quiet period is taken as
/// the trigger; pulses inside the guard, or off the slot grid, invalidate
/// the frame.
class FrameDecoder {
 public:
  explicit FrameDecoder(const Codebook& codebook);

  struct Frame {
    double trigger_time = 0.0;
    bool valid = false;  // false when framing was violated
    SymbolWord symbols;
  };

  /// Feeds one pulse arrival; returns a completed frame if this pulse closed one.
  std::optional<Frame> on_pulse(double arrival);
  /// Completes the open frame if `now` is past its last slot.
  std::optional<Frame> on_time(double now);
  /// Time at which the open frame ends, if any.
  std::optional<double> deadline() const;

 private:
  std::optional<Frame> close();

  const Codebook* codebook_;
  std::optional<Frame> open_;
  bool violated_ = false;
};

}  // namespace fibertb::protocol
