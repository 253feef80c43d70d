#include "fibertb/stokes.hpp"

#include <algorithm>
#include <cmath>

namespace fibertb {

bool is_unit_stokes(const Stokes& s, double tolerance) {
  return std::abs(s.squaredNorm() - 1.0) <= tolerance;
}

double great_circle_angle(const Stokes& a, const Stokes& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

Stokes any_perpendicular(const Stokes& s) {
  // Cross with the coordinate axis least aligned with s.
  Eigen::Index axis = 0;
  s.cwiseAbs().minCoeff(&axis);
  return s.cross(Stokes::Unit(axis)).normalized();
}

Rotation rotation_towards(const Stokes& from, const Stokes& to, double angle) {
  Eigen::Vector3d axis = from.cross(to);
  const double n = axis.norm();
  if (n < 1e-15) {
    axis = any_perpendicular(from);
  } else {
    axis /= n;
  }
  return Rotation(Eigen::AngleAxisd(angle, axis));
}

Stokes slerp(const Stokes& a, const Stokes& b, double t) {
  const double omega = great_circle_angle(a, b);
  if (omega < 1e-12) return a;
  const double s = std::sin(omega);
  Stokes out = (std::sin((1.0 - t) * omega) / s) * a + (std::sin(t * omega) / s) * b;
  return out.normalized();
}

}  // namespace fibertb
