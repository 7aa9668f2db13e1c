#pragma once

#include "wrenchsim/numerics.hpp"
#include "wrenchsim/sensing_types.hpp"

namespace wrenchsim {

inline constexpr double kDefaultGravity = -9.81;
inline constexpr double kDefaultDt = 0.002;

/// Ground-truth payload. `com_offset` is the CoM relative to the TCP in
/// base-frame axes; `inertia` is taken about the CoM.
struct PayloadTruth {
  double mass = 0.0;
  Vec3 com_offset = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();
};

struct KinematicState {
  Vec3 p_tcp = Vec3::Zero();
  Vec3 v_tcp = Vec3::Zero();
  Vec3 a_tcp = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 alpha = Vec3::Zero();
};

struct GravityModel {
  double g_scalar = kDefaultGravity;
  Vec3 g_vec() const { return Vec3(0.0, 0.0, g_scalar); }
};

/// a_C = a_tcp + alpha x r + omega x (omega x r)
Vec3 com_acceleration(const KinematicState& state, const Vec3& r);

/// Wrench the wrist applies to the payload, which is what the sensor reports:
///   f   = m (a_C - g)
///   tau = r x f + I alpha + omega x (I omega)
/// A static 1 kg payload therefore reads f_z = +9.81 N.
Wrench synthesize_wrench(const KinematicState& state, const PayloadTruth& payload,
                         const GravityModel& gravity);

/// Advances the TCP one step toward a commanded Cartesian velocity.
///
/// With `tracking_lag` == 0 the inner velocity loop is ideal and the TCP
/// velocity equals the command after the step. Otherwise the velocity follows
/// a first-order lag with that time constant (exact discretization). The
/// acceleration is the finite difference of velocity over the step; position
/// advances with the new velocity. omega and alpha are carried unchanged.
///
/// Throws NonpositiveTimestep.
KinematicState step_plant(const KinematicState& state, const Vec3& commanded_velocity, double dt,
                          double tracking_lag = 0.0);

}  // namespace wrenchsim
