#include "fibertb/trace.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace fibertb {

template <typename T>
BasicTrace<T>::BasicTrace(double t0, double dt, std::vector<T> values, Unit unit)
    : t0_(t0), dt_(dt), values_(std::move(values)), unit_(unit) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw InvalidRate(fmt::format("trace sample period must be positive, got {}", dt_));
  }
  if (values_.empty()) {
    throw TooShort("trace must hold at least one sample");
  }
  if constexpr (std::is_same_v<T, Stokes>) {
    if (unit_ != Unit::Stokes) {
      throw UnitMismatch("Stokes trace must carry the stokes unit");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!is_unit_stokes(values_[i])) {
        throw InvalidArgument(fmt::format("Stokes sample {} has norm {}", i, values_[i].norm()));
      }
    }
  }
}

template class BasicTrace<double>;
template class BasicTrace<Stokes>;

void require_unit(Unit actual, Unit expected, std::string_view operation) {
  if (actual != expected) {
    throw UnitMismatch(fmt::format("{}: expected a trace in {}, got {}", operation, to_string(expected),
                                   to_string(actual)));
  }
}

bool same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (a.size != b.size) return false;
  const double tol = 1e-9 * std::max(a.dt, b.dt);
  return std::abs(a.dt - b.dt) <= 1e-9 * a.dt && std::abs(a.t0 - b.t0) <= std::max(tol, 1e-9 * std::abs(a.t0));
}

}  // namespace fibertb
