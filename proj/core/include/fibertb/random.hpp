#pragma once

#include <cstdint>
#include <limits>

namespace fibertb {

struct RandomSeed {
  std::uint64_t value = 0;
};

/// Fixed stream identifiers. Each generator draws from its own stream, so
/// adding a stream never perturbs the numbers an existing one produces.
namespace streams {
inline constexpr std::uint64_t kFrequencyCommon = 1;
inline constexpr std::uint64_t kFrequencyA = 2;
inline constexpr std::uint64_t kFrequencyB = 3;
inline constexpr std::uint64_t kPolarizationWalk = 10;
inline constexpr std::uint64_t kPolarizationWalkB = 11;
inline constexpr std::uint64_t kPhotons = 20;
inline constexpr std::uint64_t kTimingJitter = 30;
inline constexpr std::uint64_t kTdiMeasure = 40;
inline constexpr std::uint64_t kSession = 50;
inline constexpr std::uint64_t kWeather = 60;
}  // namespace streams

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: the n-th output is mix64(key + n * gamma), with
/// the key derived from (seed, stream). Satisfies UniformRandomBitGenerator.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  CounterEngine(RandomSeed seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Derived engine for a sub-stream; independent of how far this one has advanced.
  CounterEngine substream(std::uint64_t id) const noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  CounterEngine(std::uint64_t key, int) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Convenience draws on top of CounterEngine.
class Rng {
 public:
  Rng(RandomSeed seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}
  explicit Rng(CounterEngine engine) noexcept : engine_(engine) {}

  /// Uniform in the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  double rayleigh(double sigma) noexcept;
  std::uint32_t poisson(double mean);

  CounterEngine& engine() noexcept { return engine_; }

 private:
  CounterEngine engine_;
};

}  // namespace fibertb
