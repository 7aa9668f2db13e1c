#include "wrenchsim/plant.hpp"

#include <cmath>

#include "wrenchsim/errors.hpp"

namespace wrenchsim {

Vec3 com_acceleration(const KinematicState& state, const Vec3& r) {
  return state.a_tcp + cross(state.alpha, r) + cross(state.omega, cross(state.omega, r));
}

Wrench synthesize_wrench(const KinematicState& state, const PayloadTruth& payload,
                         const GravityModel& gravity) {
  const Vec3 a_c = com_acceleration(state, payload.com_offset);
  Wrench w;
  w.force = payload.mass * (a_c - gravity.g_vec());
  const Vec3 tau_rot =
      payload.inertia * state.alpha + cross(state.omega, payload.inertia * state.omega);
  w.moment = cross(payload.com_offset, w.force) + tau_rot;
  return w;
}

KinematicState step_plant(const KinematicState& state, const Vec3& commanded_velocity, double dt,
                          double tracking_lag) {
  if (!(dt > 0.0)) throw NonpositiveTimestep(dt);

  KinematicState next = state;
  if (tracking_lag > 0.0) {
    const double decay = std::exp(-dt / tracking_lag);
    next.v_tcp = commanded_velocity + (state.v_tcp - commanded_velocity) * decay;
  } else {
    next.v_tcp = commanded_velocity;
  }
  next.a_tcp = (next.v_tcp - state.v_tcp) / dt;
  next.p_tcp = state.p_tcp + next.v_tcp * dt;
  return next;
}

}  // namespace wrenchsim
