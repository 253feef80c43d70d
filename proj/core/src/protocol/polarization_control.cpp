#include "fibertb/protocol/polarization_control.hpp"

#include <algorithm>

#include "fibertb/errors.hpp"

namespace fibertb::protocol {

Rotation RotationCommand::as_rotation() const {
  if (is_identity()) return Rotation::Identity();
  return Rotation(Eigen::AngleAxisd(angle, axis));
}

std::pair<RotationCommand, PolarizationControllerState> polarization_correct(
    const PolarizationControllerState& state, const Stokes& measured) {
  if (!is_unit_stokes(measured)) throw InvalidArgument("measured polarization is not a unit Stokes vector");
  if (!is_unit_stokes(state.target)) throw InvalidArgument("target polarization is not a unit Stokes vector");

  PolarizationControllerState next = state;
  RotationCommand command;
  const double error = great_circle_angle(measured, state.target);
  if (error > 0.0) {
    Eigen::Vector3d axis = measured.cross(state.target);
    const double n = axis.norm();
    command.axis = n < 1e-15 ? any_perpendicular(measured) : Eigen::Vector3d(axis / n);
    command.angle = std::min(error, state.max_step);
  }
  const Rotation r = command.as_rotation();
  next.compensation = (r * state.compensation).normalized();
  next.current = (r * measured).normalized();
  return {command, next};
}

}  // namespace fibertb::protocol
