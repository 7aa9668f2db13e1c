#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wrenchsim/control.hpp"
#include "wrenchsim/estimation.hpp"
#include "wrenchsim/numerics.hpp"

namespace wrenchsim {

struct Scenario;

struct TaskPlan {
  std::vector<Waypoint> waypoints;
  Vec3 place_nominal = Vec3::Zero();
  double layer_height = 0.04;
  int layer_index = 0;
  double support_x = 0.0;
  double support_half_width = 0.005;
  double mass_window = 0.5;  // s, starts at the begin_mass_window event
};

/// Checks the structural invariants of a plan: exactly one grasp and one
/// release, windows ordered grasp < mass < com begin < com end < release, and
/// place-relative waypoints only after the CoM window has closed.
/// Throws ConfigError naming the offending field.
void validate(const TaskPlan& plan);

struct PlacementResult {
  Vec3 ideal_correction = Vec3::Zero();
  Vec3 estimated_correction = Vec3::Zero();
  Vec3 ideal_corrected_tcp = Vec3::Zero();
  Vec3 commanded_tcp = Vec3::Zero();
  Vec3 actual_tcp = Vec3::Zero();
  double correction_command_error = 0.0;
  double release_error_vs_ideal = 0.0;
  double execution_error = 0.0;
  double object_com_final_x = 0.0;
  // Offset actually realized by the release: place_nominal.x - actual_tcp.x.
  double implemented_com_x = 0.0;
};

struct TaskReport {
  MassEstimate mass_estimate;
  OffsetEstimate offset_estimate;
  PlacementResult placement;
  double offset_rmse_x = 0.0;
  double tcp_rmse_x = 0.0;
  bool stable = false;
  double margin = 0.0;
  bool correction_applied = false;
  std::vector<std::string> flags;
};

/// p_nominal - (r_x, r_y, 0). The vertical coordinate is left to the task.
Vec3 corrected_place(const Vec3& p_nominal, const Vec3& r_hat);

/// corrected_place(...) raised by n layers of height h.
Vec3 stacking_place(const Vec3& p_nominal, const Vec3& r_hat, int n, double h);

struct EquilibriumResult {
  bool stable = false;
  double margin = 0.0;
};

/// Line-support tipping check: margin = half_width - |com_x - support_x|.
EquilibriumResult evaluate_equilibrium(double object_com_x, double support_x, double half_width);

/// Fills the three error fields from the geometric ones. All distances are
/// horizontal (x, y): the vertical placement coordinate is fixed by the task.
PlacementResult placement_errors(PlacementResult res);

/// Runs the plan under the scenario's physics and returns the report.
/// Throws TaskAborted.
TaskReport run_pick_place(const TaskPlan& plan, const Scenario& scenario);

/// Walks the waypoint list. Each step the caller passes the controller state;
/// a waypoint counts as reached once waypoint_reached holds, then its dwell
/// elapses, then its action fires and the next waypoint is examined in the
/// same step.
class WaypointSequencer {
 public:
  WaypointSequencer(std::vector<Waypoint> waypoints, double dt, double settle_velocity,
                    double timeout);

  /// `on_action(index, action)` is called for each waypoint that completes.
  /// Throws TaskAborted(kWaypointTimeout).
  template <typename OnAction>
  void update(const ControllerState& state, OnAction&& on_action) {
    while (!done()) {
      Waypoint& wp = waypoints_[active_];
      if (reached_steps_ < 0) {
        if (!waypoint_reached(state, wp, settle_velocity_)) {
          check_timeout();
          ++active_steps_;
          return;
        }
        reached_steps_ = 0;
      }
      if (reached_steps_ < dwell_steps(wp)) {
        ++reached_steps_;
        ++active_steps_;
        return;
      }
      const std::size_t idx = active_;
      advance();
      on_action(idx, wp.action);
    }
  }

  bool done() const noexcept { return active_ >= waypoints_.size(); }
  std::size_t active_index() const noexcept { return active_; }
  /// Reference position of the active waypoint (last one once done).
  Vec3 reference() const;

  /// Resolves place-relative waypoints against a placement target.
  void set_place_target(const Vec3& target);
  const std::vector<Waypoint>& waypoints() const noexcept { return waypoints_; }

 private:
  long dwell_steps(const Waypoint& wp) const;
  void check_timeout() const;
  void advance();

  std::vector<Waypoint> waypoints_;
  std::vector<Vec3> place_offsets_;
  double dt_;
  double settle_velocity_;
  double timeout_;
  std::size_t active_ = 0;
  long reached_steps_ = -1;
  long active_steps_ = 0;
};

}  // namespace wrenchsim
