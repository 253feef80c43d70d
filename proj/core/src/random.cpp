#include "fibertb/random.hpp"

#include <cmath>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "fibertb/errors.hpp"

namespace fibertb {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterEngine::CounterEngine(RandomSeed seed, std::uint64_t stream) noexcept
    : key_(mix64(seed.value ^ mix64(stream + kGamma))) {}

CounterEngine::result_type CounterEngine::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

CounterEngine CounterEngine::substream(std::uint64_t id) const noexcept {
  return CounterEngine(mix64(key_ ^ mix64(id * kGamma + 0x632BE59BD9B4E019ULL)), 0);
}

double Rng::uniform() noexcept {
  // 53 random bits, offset by half an ulp so 0 is never returned.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double Rng::rayleigh(double sigma) noexcept {
  return sigma * std::sqrt(-2.0 * std::log(uniform()));
}

std::uint32_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw InvalidArgument("Poisson mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  boost::random::poisson_distribution<std::uint32_t, double> dist(mean);
  return dist(engine_);
}

}  // namespace fibertb
