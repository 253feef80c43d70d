#include "fibertb/protocol/ber.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb::protocol {

namespace {

double binomial_error(std::size_t errors, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(errors) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double fraction(std::size_t errors, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(n);
}

}  // namespace

BerResult compute_ber(std::span<const std::uint8_t> sent, std::span<const Outcome> measured) {
  if (sent.size() != measured.size()) {
    throw Misaligned(fmt::format("{} sent bits against {} outcomes", sent.size(), measured.size()));
  }
  BerResult r;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    const Outcome o = measured[i];
    if (o != Outcome::Bit0 && o != Outcome::Bit1) continue;
    const bool wrong = (o == Outcome::Bit1) != (sent[i] != 0);
    if (sent[i] == 0) {
      ++r.detected_plus;
      r.errors_plus += wrong ? 1 : 0;
    } else {
      ++r.detected_minus;
      r.errors_minus += wrong ? 1 : 0;
    }
  }
  r.ber_plus = fraction(r.errors_plus, r.detected_plus);
  r.ber_minus = fraction(r.errors_minus, r.detected_minus);
  r.ber_mean = fraction(r.errors_plus + r.errors_minus, r.detected());
  r.std_error_plus = binomial_error(r.errors_plus, r.detected_plus);
  r.std_error_minus = binomial_error(r.errors_minus, r.detected_minus);
  r.std_error_mean = binomial_error(r.errors_plus + r.errors_minus, r.detected());
  return r;
}

}  // namespace fibertb::protocol
