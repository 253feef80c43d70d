#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fibertb/errors.hpp"
#include "fibertb/stokes.hpp"
#include "fibertb/units.hpp"

namespace fibertb {

/// Uniform sampling grid: t0, t0 + dt, ..., t0 + (size - 1) dt.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t size = 0;

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double last() const { return size == 0 ? t0 : time(size - 1); }
};

/// Uniformly sampled, unit-tagged time series. Immutable once built.
///
/// Invariants: dt > 0, at least one sample, and for Stokes traces every
/// sample is unit norm within kStokesNormTolerance.
template <typename T>
class BasicTrace {
 public:
  using value_type = T;

  BasicTrace(double t0, double dt, std::vector<T> values, Unit unit);

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  double rate() const noexcept { return 1.0 / dt_; }
  Unit unit() const noexcept { return unit_; }
  std::size_t size() const noexcept { return values_.size(); }
  double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
  double end_time() const noexcept { return time(values_.size() - 1); }
  TimeGrid grid() const noexcept { return {t0_, dt_, values_.size()}; }

  std::span<const T> values() const noexcept { return values_; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Moves the samples out; the trace is left empty and must not be reused.
  std::vector<T> release() && { return std::move(values_); }

 private:
  double t0_;
  double dt_;
  std::vector<T> values_;
  Unit unit_;
};

using SampledTrace = BasicTrace<double>;
using StokesTrace = BasicTrace<Stokes>;

extern template class BasicTrace<double>;
extern template class BasicTrace<Stokes>;

/// Throws UnitMismatch naming `operation` when `actual != expected`.
void require_unit(Unit actual, Unit expected, std::string_view operation);

/// True when both grids share t0, dt and length (to a relative 1e-9 in time).
bool same_grid(const TimeGrid& a, const TimeGrid& b);

}  // namespace fibertb
