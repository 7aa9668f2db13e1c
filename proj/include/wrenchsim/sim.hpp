#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wrenchsim/control.hpp"
#include "wrenchsim/errors.hpp"
#include "wrenchsim/estimation.hpp"
#include "wrenchsim/plant.hpp"
#include "wrenchsim/sensing.hpp"
#include "wrenchsim/task.hpp"

namespace wrenchsim {

inline constexpr double kDivergenceLimit = 1e6;

/// Angular motion injected into the payload while it is attached, measured
/// from the grasp instant tau:
///   alpha(tau) = axis * amp * sin(2 pi f tau)
///   omega(tau) = axis * amp / (2 pi f) * (1 - cos(2 pi f tau))
struct AngularPerturbation {
  double amplitude = 0.0;  // rad/s^2
  double frequency = 0.5;  // Hz
  Vec3 axis = Vec3::UnitY();
};

enum class CompensationMode { kEstimated, kKnown, kOff };
enum class CorrectionMode { kMandatory, kOptional, kOff };

/// Recorded inputs that replace parts of the simulation.
struct Replay {
  // Used for placement instead of the window estimate.
  std::optional<Vec3> estimated_offset;
  // Release TCP (x, y) reported instead of the simulated one.
  std::optional<Eigen::Vector2d> actual_tcp_xy;
  // Row k replaces the sensor output at step k; later steps use the sensor.
  std::vector<Wrench> wrench_stream;
};

struct Scenario {
  PayloadTruth payload;
  GravityModel gravity;
  SensorConfig sensor;
  AdmittanceGains gains;
  TaskPlan plan;
  double dt = kDefaultDt;
  double tracking_lag = 0.0;
  std::optional<AngularPerturbation> angular_perturbation;
  std::uint64_t seed = 0;  // drives the sensor RNG (overrides sensor.seed)

  EstimationConfig estimation;
  CompensationMode compensation = CompensationMode::kEstimated;
  double mass_scale = 1.0;
  CorrectionMode correction = CorrectionMode::kMandatory;
  double settle_velocity = kDefaultSettleVelocity;
  double waypoint_timeout = 30.0;
  std::optional<Vec3> start;  // defaults to the first waypoint
  Replay replay;
};

/// Throws ConfigError on invalid settings.
void validate(const Scenario& scenario);

enum class TaskPhase { kApproach, kMassWindow, kTransport, kComWindow, kPlace, kRetreat };
std::string_view to_string(TaskPhase p);

struct LogRow {
  double t = 0.0;
  TaskPhase phase = TaskPhase::kApproach;
  Vec3 p_ref;
  Vec3 p_a;
  Vec3 v_a;
  Vec3 p_tcp;
  Vec3 p_ideal;
  Wrench measured;
  Wrench truth;
  Vec3 f_exc;
  double m_hat = 0.0;  // NaN until the mass window closes
  Vec3 r_hat_raw;      // NaN until the first offset solve
  Vec3 r_hat_filtered;
  Vec3 r_true;
};

struct TrajectoryLog {
  double dt = kDefaultDt;
  std::vector<LogRow> rows;
};

struct SimOutcome {
  TaskReport report;
  TrajectoryLog log;
  std::optional<AbortReason> abort;
  std::string abort_detail;

  bool completed() const noexcept { return !abort.has_value(); }
};

/// Runs the closed loop to completion or abort without throwing TaskAborted;
/// the partial log is kept on abort. Throws NumericalDivergence and
/// ConfigError.
SimOutcome simulate(const Scenario& scenario);

struct SimResult {
  TaskReport report;
  TrajectoryLog log;
};

/// As simulate(), but an abort is raised as TaskAborted.
SimResult run_simulation(const Scenario& scenario);

/// Position trace of the same controller, on the same reference schedule,
/// with the true payload wrench removed from its input each step.
std::vector<Vec3> ideal_admittance_trace(const Scenario& scenario);

}  // namespace wrenchsim
