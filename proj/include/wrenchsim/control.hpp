#pragma once

#include <string_view>

#include "wrenchsim/numerics.hpp"
#include "wrenchsim/sensing_types.hpp"

namespace wrenchsim {

inline constexpr double kDefaultSettleVelocity = 1e-3;  // m/s

/// Diagonal virtual inertia / damping / stiffness.
struct AdmittanceGains {
  Vec3 inertia = Vec3::Constant(10.0);
  Vec3 damping = Vec3::Constant(80.0);
  Vec3 stiffness = Vec3::Constant(200.0);

  Mat3 M() const { return inertia.asDiagonal(); }
  Mat3 B() const { return damping.asDiagonal(); }
  Mat3 K() const { return stiffness.asDiagonal(); }
};

bool valid(const AdmittanceGains& gains);

struct ControllerState {
  Vec3 p_a = Vec3::Zero();
  Vec3 v_a = Vec3::Zero();
  Vec3 a_a = Vec3::Zero();
  Vec3 f_exc = Vec3::Zero();
};

enum class WaypointAction {
  kNone,
  kGrasp,
  kRelease,
  kBeginMassWindow,
  kBeginComWindow,
  kEndComWindow,
};

std::string_view to_string(WaypointAction a);
// Returns false on unknown names.
bool parse_action(std::string_view name, WaypointAction& out);

struct Waypoint {
  Vec3 position = Vec3::Zero();
  double tolerance = 1e-3;
  double dwell = 0.0;
  WaypointAction action = WaypointAction::kNone;
  // Position is an offset from the (corrected) placement target rather than
  // an absolute base-frame point.
  bool relative_to_place = false;
};

/// Admittance acceleration for a piecewise-constant reference:
///   M^-1 (F - B v_a - K (p_a - p_ref) + F_exc)
///
/// `applied.force` is the force acting on the tool. A hanging payload pulls
/// the tool down, so it enters here with the opposite sign of the sensor
/// reading (see synthesize_wrench).
Vec3 admittance_accel(const ControllerState& state, const Wrench& applied,
                      const AdmittanceGains& gains, const Vec3& p_ref);

/// Semi-implicit Euler: velocity first, then position with the new velocity.
/// Throws NonpositiveTimestep.
ControllerState integrate_controller(const ControllerState& state, const Vec3& accel, double dt);

/// Static displacement K^-1 F where the admittance acceleration vanishes
/// under a constant uncompensated force.
Vec3 steady_state_sag(const AdmittanceGains& gains, const Vec3& uncompensated_force);

bool waypoint_reached(const ControllerState& state, const Waypoint& wp,
                      double settle_velocity = kDefaultSettleVelocity);

}  // namespace wrenchsim
