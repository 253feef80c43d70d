#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace fibertb::protocol {

enum class Outcome : std::uint8_t {
  Bit0,          // port 0 clicked: measured |+>
  Bit1,          // port 1 clicked: measured |->
  NoDetection,   // lost, or only outer slots clicked
  Inconclusive,  // both middle ports clicked
};

struct BerResult {
  double ber_plus = 0.0;
  double ber_minus = 0.0;
  double ber_mean = 0.0;
  double std_error_plus = 0.0;
  double std_error_minus = 0.0;
  double std_error_mean = 0.0;
  std::size_t detected_plus = 0;
  std::size_t detected_minus = 0;
  std::size_t errors_plus = 0;
  std::size_t errors_minus = 0;

  std::size_t detected() const { return detected_plus + detected_minus; }
};

/// Fraction of conclusive detections that read the opposite of the sent bit,
/// per state and pooled, with binomial standard errors sqrt(p (1 - p) / N).
/// Undetected and inconclusive trials are excluded. Throws Misaligned when
/// the sequences differ in length.
BerResult compute_ber(std::span<const std::uint8_t> sent, std::span<const Outcome> measured);

}  // namespace fibertb::protocol
