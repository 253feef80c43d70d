#pragma once

#include <numbers>
#include <utility>

#include "fibertb/stokes.hpp"

namespace fibertb::protocol {

inline constexpr double kPolarizationTolerance = 20.0 * std::numbers::pi / 180.0;

struct RotationCommand {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double angle = 0.0;

  Rotation as_rotation() const;
  bool is_identity() const { return angle == 0.0; }
};

struct PolarizationControllerState {
  Stokes current = Stokes::UnitX();
  Stokes target = Stokes::UnitX();
  double tolerance = kPolarizationTolerance;
  /// Largest rotation the waveplates make per iteration.
  double max_step = std::numbers::pi;
  /// Accumulated compensation applied to incoming light.
  Rotation compensation = Rotation::Identity();

  double error() const { return great_circle_angle(current, target); }
};

/// Great-circle rotation taking `measured` towards the target, clipped to
/// max_step. The returned state has the rotation folded into its
/// compensation and `current` set to the corrected polarization.
std::pair<RotationCommand, PolarizationControllerState> polarization_correct(
    const PolarizationControllerState& state, const Stokes& measured);

}  // namespace fibertb::protocol
