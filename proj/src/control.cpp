#include "wrenchsim/control.hpp"

#include <array>
#include <utility>

#include "wrenchsim/errors.hpp"

namespace wrenchsim {

namespace {

constexpr std::array<std::pair<WaypointAction, std::string_view>, 6> kActionNames{{
    {WaypointAction::kNone, "none"},
    {WaypointAction::kGrasp, "grasp"},
    {WaypointAction::kRelease, "release"},
    {WaypointAction::kBeginMassWindow, "begin_mass_window"},
    {WaypointAction::kBeginComWindow, "begin_com_window"},
    {WaypointAction::kEndComWindow, "end_com_window"},
}};

}  // namespace

bool valid(const AdmittanceGains& gains) {
  return gains.inertia.allFinite() && gains.damping.allFinite() && gains.stiffness.allFinite() &&
         (gains.inertia.array() > 0.0).all() && (gains.damping.array() > 0.0).all() &&
         (gains.stiffness.array() > 0.0).all();
}

std::string_view to_string(WaypointAction a) {
  for (const auto& [act, name] : kActionNames) {
    if (act == a) return name;
  }
  return "none";
}

bool parse_action(std::string_view name, WaypointAction& out) {
  for (const auto& [act, n] : kActionNames) {
    if (n == name) {
      out = act;
      return true;
    }
  }
  return false;
}

Vec3 admittance_accel(const ControllerState& state, const Wrench& applied,
                      const AdmittanceGains& gains, const Vec3& p_ref) {
  const Vec3 net = applied.force - gains.damping.cwiseProduct(state.v_a) -
                   gains.stiffness.cwiseProduct(state.p_a - p_ref) + state.f_exc;
  return net.cwiseQuotient(gains.inertia);
}

ControllerState integrate_controller(const ControllerState& state, const Vec3& accel, double dt) {
  if (!(dt > 0.0)) throw NonpositiveTimestep(dt);
  ControllerState next = state;
  next.a_a = accel;
  next.v_a = state.v_a + accel * dt;
  next.p_a = state.p_a + next.v_a * dt;
  return next;
}

Vec3 steady_state_sag(const AdmittanceGains& gains, const Vec3& uncompensated_force) {
  return uncompensated_force.cwiseQuotient(gains.stiffness);
}

bool waypoint_reached(const ControllerState& state, const Waypoint& wp, double settle_velocity) {
  return (state.p_a - wp.position).norm() <= wp.tolerance && state.v_a.norm() <= settle_velocity;
}

}  // namespace wrenchsim
