#include "fibertb/protocol/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb::protocol {

namespace {

// Arrival tolerance around each slot centre.
constexpr double kSlotTolerance = 0.25 * kSlotPeriod;

bool admissible_pair(const SymbolWord& a, const SymbolWord& b) {
  const std::size_t d = hamming_distance(a, b);
  if (d < 2) return false;
  // Two equal-weight words at distance 2 share a single-deletion image.
  return weight(a) != weight(b) || d >= 4;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::DataTransmission: return "data";
    case Command::PolarizationReference: return "polarization-reference";
    case Command::TdiReference: return "tdi-reference";
    case Command::Idle: return "idle";
  }
  return "?";
}

std::optional<Command> ClockCommandWord::meaning() const {
  if (code >= kCommandCount) return std::nullopt;
  return static_cast<Command>(code);
}

Codebook::Codebook(std::vector<ClockCommandWord> words, std::size_t word_length)
    : words_(std::move(words)), word_length_(word_length) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].symbols.size() != word_length_) {
      throw InvalidArgument(fmt::format("codeword {} has {} symbols, expected {}", i, words_[i].symbols.size(),
                                        word_length_));
    }
    words_[i].code = static_cast<std::uint32_t>(i);
  }
}

const ClockCommandWord& Codebook::for_command(Command command) const {
  const auto index = static_cast<std::size_t>(command);
  if (index >= words_.size()) {
    throw ConfigError(fmt::format("codebook of {} words has no entry for {}", words_.size(), to_string(command)));
  }
  return words_[index];
}

std::size_t weight(const SymbolWord& word) {
  return static_cast<std::size_t>(std::count(word.begin(), word.end(), Symbol::Pulse));
}

std::size_t hamming_distance(const SymbolWord& a, const SymbolWord& b) {
  if (a.size() != b.size()) throw LengthMismatch(fmt::format("words of length {} and {}", a.size(), b.size()));
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

std::vector<SymbolWord> single_pulse_deletions(const SymbolWord& word) {
  std::vector<SymbolWord> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] == Symbol::Pulse) {
      SymbolWord w = word;
      w[i] = Symbol::NoPulse;
      out.push_back(std::move(w));
    }
  }
  return out;
}

SymbolWord word_from_bits(std::uint64_t bits, std::size_t length) {
  SymbolWord w(length, Symbol::NoPulse);
  for (std::size_t i = 0; i < length; ++i) {
    if ((bits >> (length - 1 - i)) & 1U) w[i] = Symbol::Pulse;
  }
  return w;
}

bool is_valid_codebook(const Codebook& codebook) {
  const auto& words = codebook.words();
  std::set<SymbolWord> codewords;
  for (const auto& w : words) {
    if (w.symbols.size() != codebook.word_length()) return false;
    if (!codewords.insert(w.symbols).second) return false;
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      if (hamming_distance(words[i].symbols, words[j].symbols) < 2) return false;
    }
  }
  std::set<SymbolWord> images;
  for (const auto& w : words) {
    for (auto& d : single_pulse_deletions(w.symbols)) {
      if (codewords.count(d) > 0 || !images.insert(std::move(d)).second) return false;
    }
  }
  return true;
}

Codebook build_codebook(std::size_t n_words, std::size_t word_length) {
  if (n_words == 0) throw InvalidArgument("codebook needs at least one word");
  if (word_length == 0 || word_length > kMaxWordLength) {
    throw CapacityExceeded(fmt::format("word length {} outside 1..{}", word_length, kMaxWordLength));
  }
  std::vector<ClockCommandWord> chosen;
  const std::uint64_t limit = std::uint64_t{1} << word_length;
  for (std::uint64_t bits = 0; bits < limit && chosen.size() < n_words; ++bits) {
    SymbolWord candidate = word_from_bits(bits, word_length);
    // A single lost pulse must never turn a codeword into silence.
    if (weight(candidate) < 2) continue;
    const bool fits = std::all_of(chosen.begin(), chosen.end(),
                                  [&](const ClockCommandWord& c) { return admissible_pair(c.symbols, candidate); });
    if (fits) chosen.push_back({std::move(candidate), static_cast<std::uint32_t>(chosen.size())});
  }
  if (chosen.size() < n_words) {
    throw CapacityExceeded(fmt::format("only {} of {} words fit in {} symbols", chosen.size(), n_words, word_length));
  }
  return Codebook(std::move(chosen), word_length);
}

DecodeResult decode_command(const SymbolWord& received, const Codebook& codebook) {
  if (received.size() != codebook.word_length()) {
    throw LengthMismatch(fmt::format("received {} symbols, codebook uses {}", received.size(), codebook.word_length()));
  }
  for (const auto& w : codebook.words()) {
    if (w.symbols == received) return {w.code, false};
  }
  std::optional<std::uint32_t> match;
  std::size_t matches = 0;
  const std::size_t received_weight = weight(received);
  for (const auto& w : codebook.words()) {
    if (weight(w.symbols) != received_weight + 1) continue;
    bool covers = true;
    for (std::size_t i = 0; i < received.size() && covers; ++i) {
      covers = !(received[i] == Symbol::Pulse && w.symbols[i] == Symbol::NoPulse);
    }
    if (covers) {
      match = w.code;
      ++matches;
    }
  }
  if (matches == 1) return {match, true};
  return {};
}

double frame_guard(std::size_t word_length) { return static_cast<double>(word_length + 1) * kSlotPeriod; }

double frame_length(std::size_t word_length) {
  if (word_length == 0) return frame_guard(0);
  return frame_guard(word_length) + (static_cast<double>(word_length) - 0.5) * kSlotPeriod;
}

std::vector<double> frame_pulse_offsets(const SymbolWord& word) {
  std::vector<double> out{0.0};
  const double guard = frame_guard(word.size());
  for (std::size_t j = 0; j < word.size(); ++j) {
    if (word[j] == Symbol::Pulse) out.push_back(guard + static_cast<double>(j) * kSlotPeriod);
  }
  return out;
}

FrameDecoder::FrameDecoder(const Codebook& codebook) : codebook_(&codebook) {}

std::optional<double> FrameDecoder::deadline() const {
  if (!open_) return std::nullopt;
  return open_->trigger_time + frame_length(codebook_->word_length());
}

std::optional<FrameDecoder::Frame> FrameDecoder::close() {
  if (!open_) return std::nullopt;
  Frame frame = std::move(*open_);
  frame.valid = !violated_;
  open_.reset();
  violated_ = false;
  return frame;
}

std::optional<FrameDecoder::Frame> FrameDecoder::on_time(double now) {
  const auto end = deadline();
  if (end && now >= *end) return close();
  return std::nullopt;
}

std::optional<FrameDecoder::Frame> FrameDecoder::on_pulse(double arrival) {
  std::optional<Frame> finished = on_time(arrival);
  if (!open_) {
    open_ = Frame{arrival, false, SymbolWord(codebook_->word_length(), Symbol::NoPulse)};
    violated_ = false;
    return finished;
  }
  const std::size_t length = codebook_->word_length();
  const double offset = arrival - open_->trigger_time - frame_guard(length);
  const double slot = std::round(offset / kSlotPeriod);
  if (slot < 0.0 || slot >= static_cast<double>(length) || std::abs(offset - slot * kSlotPeriod) > kSlotTolerance) {
    violated_ = true;
  } else {
    open_->symbols[static_cast<std::size_t>(slot)] = Symbol::Pulse;
  }
  return finished;
}

}  // namespace fibertb::protocol
