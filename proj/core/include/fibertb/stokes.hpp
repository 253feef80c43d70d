#pragma once

#include <Eigen/Geometry>

namespace fibertb {

/// Normalized Stokes vector (S1, S2, S3) on the Poincare sphere.
using Stokes = Eigen::Vector3d;
using Rotation = Eigen::Quaterniond;

inline constexpr double kStokesNormTolerance = 1e-6;

bool is_unit_stokes(const Stokes& s, double tolerance = kStokesNormTolerance);

/// Great-circle angle between two polarization states, in radians.
double great_circle_angle(const Stokes& a, const Stokes& b);

/// A unit vector perpendicular to `s`.
Stokes any_perpendicular(const Stokes& s);

/// Rotation by `angle` about the normal of the plane containing `from` and
/// `to`, oriented so that positive angles move `from` towards `to`.
Rotation rotation_towards(const Stokes& from, const Stokes& to, double angle);

/// Geodesic interpolation between two unit vectors, t in [0, 1].
Stokes slerp(const Stokes& a, const Stokes& b, double t);

}  // namespace fibertb
