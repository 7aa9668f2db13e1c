#include "wrenchsim/task.hpp"

#include <cmath>
#include <optional>

#include "wrenchsim/errors.hpp"
#include "wrenchsim/sim.hpp"

namespace wrenchsim {

namespace {

std::string wp_field(std::size_t i) { return "plan.waypoints[" + std::to_string(i) + "]"; }

}  // namespace

void validate(const TaskPlan& plan) {
  if (plan.waypoints.empty()) throw ConfigError("plan.waypoints", "must not be empty");
  if (!(plan.layer_height > 0.0)) throw ConfigError("plan.layer_height_m", "must be > 0");
  if (plan.layer_index < 0) throw ConfigError("plan.layer_index", "must be >= 0");
  if (!(plan.support_half_width > 0.0)) {
    throw ConfigError("plan.support_half_width_m", "must be > 0");
  }
  if (!(plan.mass_window > 0.0)) throw ConfigError("plan.mass_window_s", "must be > 0");
  if (!plan.place_nominal.allFinite() || !std::isfinite(plan.support_x)) {
    throw ConfigError("plan", "placement geometry must be finite");
  }

  std::optional<std::size_t> grasp, release, mass, com_begin, com_end;
  auto once = [](std::optional<std::size_t>& slot, std::size_t i, const char* what) {
    if (slot) throw ConfigError(wp_field(i) + ".action", std::string("duplicate ") + what);
    slot = i;
  };
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const Waypoint& wp = plan.waypoints[i];
    if (!wp.position.allFinite()) throw ConfigError(wp_field(i) + ".position_m", "must be finite");
    if (!(wp.tolerance > 0.0)) throw ConfigError(wp_field(i) + ".tolerance_m", "must be > 0");
    if (!(wp.dwell >= 0.0)) throw ConfigError(wp_field(i) + ".dwell_s", "must be >= 0");
    switch (wp.action) {
      case WaypointAction::kGrasp: once(grasp, i, "grasp"); break;
      case WaypointAction::kRelease: once(release, i, "release"); break;
      case WaypointAction::kBeginMassWindow: once(mass, i, "begin_mass_window"); break;
      case WaypointAction::kBeginComWindow: once(com_begin, i, "begin_com_window"); break;
      case WaypointAction::kEndComWindow: once(com_end, i, "end_com_window"); break;
      case WaypointAction::kNone: break;
    }
  }
  if (!grasp) throw ConfigError("plan.waypoints", "exactly one grasp action required");
  if (!release) throw ConfigError("plan.waypoints", "exactly one release action required");
  if (*release < *grasp) throw ConfigError(wp_field(*release) + ".action", "release before grasp");
  if (mass && (*mass < *grasp || *mass > *release)) {
    throw ConfigError(wp_field(*mass) + ".action", "mass window must lie between grasp and release");
  }
  if (com_begin.has_value() != com_end.has_value()) {
    throw ConfigError("plan.waypoints", "begin_com_window and end_com_window come as a pair");
  }
  if (com_begin) {
    if (!mass || *com_begin < *mass) {
      throw ConfigError(wp_field(*com_begin) + ".action", "CoM window must follow the mass window");
    }
    if (*com_end < *com_begin || *com_end > *release) {
      throw ConfigError(wp_field(*com_end) + ".action",
                        "CoM window must close after it opens and before release");
    }
  }
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    if (plan.waypoints[i].relative_to_place && com_end && i <= *com_end) {
      throw ConfigError(wp_field(i) + ".relative_to_place",
                        "place-relative waypoints must follow end_com_window");
    }
  }
}

Vec3 corrected_place(const Vec3& p_nominal, const Vec3& r_hat) {
  return p_nominal - Vec3(r_hat.x(), r_hat.y(), 0.0);
}

Vec3 stacking_place(const Vec3& p_nominal, const Vec3& r_hat, int n, double h) {
  return corrected_place(p_nominal, r_hat) + Vec3(0.0, 0.0, n * h);
}

EquilibriumResult evaluate_equilibrium(double object_com_x, double support_x, double half_width) {
  EquilibriumResult out;
  out.margin = half_width - std::abs(object_com_x - support_x);
  out.stable = out.margin >= 0.0;
  return out;
}

PlacementResult placement_errors(PlacementResult res) {
  auto horiz = [](const Vec3& v) { return std::hypot(v.x(), v.y()); };
  res.correction_command_error = horiz(res.ideal_correction - res.estimated_correction);
  res.release_error_vs_ideal = horiz(res.actual_tcp - res.ideal_corrected_tcp);
  res.execution_error = horiz(res.actual_tcp - res.commanded_tcp);
  return res;
}

TaskReport run_pick_place(const TaskPlan& plan, const Scenario& scenario) {
  Scenario s = scenario;
  s.plan = plan;
  return run_simulation(s).report;
}

// ---------------------------------------------------------------------------

WaypointSequencer::WaypointSequencer(std::vector<Waypoint> waypoints, double dt,
                                     double settle_velocity, double timeout)
    : waypoints_(std::move(waypoints)),
      dt_(dt),
      settle_velocity_(settle_velocity),
      timeout_(timeout) {
  if (!(dt > 0.0)) throw NonpositiveTimestep(dt);
  place_offsets_.reserve(waypoints_.size());
  for (const auto& wp : waypoints_) place_offsets_.push_back(wp.position);
}

Vec3 WaypointSequencer::reference() const {
  if (waypoints_.empty()) return Vec3::Zero();
  return done() ? waypoints_.back().position : waypoints_[active_].position;
}

void WaypointSequencer::set_place_target(const Vec3& target) {
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    if (waypoints_[i].relative_to_place) waypoints_[i].position = target + place_offsets_[i];
  }
}

long WaypointSequencer::dwell_steps(const Waypoint& wp) const {
  return std::lround(wp.dwell / dt_);
}

void WaypointSequencer::check_timeout() const {
  if (static_cast<double>(active_steps_) * dt_ > timeout_) {
    throw TaskAborted(AbortReason::kWaypointTimeout,
                      "waypoint " + std::to_string(active_) + " not reached within " +
                          std::to_string(timeout_) + " s");
  }
}

void WaypointSequencer::advance() {
  ++active_;
  reached_steps_ = -1;
  active_steps_ = 0;
}

}  // namespace wrenchsim
