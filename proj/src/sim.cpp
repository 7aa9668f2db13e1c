#include "wrenchsim/sim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>

namespace wrenchsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec3 nan3() { return Vec3::Constant(kNaN); }

SensorConfig seeded(const Scenario& sc) {
  SensorConfig cfg = sc.sensor;
  cfg.seed = sc.seed;
  return cfg;
}

bool exceeds(const Vec3& v) { return !(v.cwiseAbs().maxCoeff() <= kDivergenceLimit); }

class Engine {
 public:
  explicit Engine(const Scenario& sc)
      : sc_(sc),
        sensor_(seeded(sc)),
        seq_(sc.plan.waypoints, sc.dt, sc.settle_velocity, sc.waypoint_timeout),
        mass_est_(sc.estimation) {
    const Vec3 start = sc.start.value_or(sc.plan.waypoints.front().position);
    plant_.p_tcp = start;
    ctrl_.p_a = start;
    shadow_.p_a = start;
    mass_steps_ = std::max(1L, std::lround(sc.plan.mass_window / sc.dt));

    Vec3 r0 = Vec3::Zero();
    if (sc.correction != CorrectionMode::kOff && sc.replay.estimated_offset) {
      r0 = *sc.replay.estimated_offset;
    }
    seq_.set_place_target(place_target(r0));
    log_.dt = sc.dt;
  }

  SimOutcome run() {
    SimOutcome out;
    try {
      for (k_ = 0;; ++k_) {
        t_ = static_cast<double>(k_) * sc_.dt;
        seq_.update(ctrl_, [this](std::size_t idx, WaypointAction a) { on_action(idx, a); });
        if (seq_.done()) break;
        step();
      }
      out.report = build_report();
    } catch (const TaskAborted& e) {
      out.abort = e.reason();
      out.abort_detail = e.what();
      out.report.flags = flags_;
    }
    out.log = std::move(log_);
    return out;
  }

 private:
  Vec3 place_target(const Vec3& r_used) const {
    return stacking_place(sc_.plan.place_nominal, r_used, sc_.plan.layer_index,
                          sc_.plan.layer_height);
  }

  void on_action(std::size_t idx, WaypointAction a) {
    switch (a) {
      case WaypointAction::kNone: break;
      case WaypointAction::kGrasp:
        attached_ = true;
        t_grasp_ = t_;
        phase_ = TaskPhase::kTransport;
        break;
      case WaypointAction::kBeginMassWindow:
        mass_active_ = true;
        mass_start_ = k_;
        phase_ = TaskPhase::kMassWindow;
        break;
      case WaypointAction::kBeginComWindow:
        if (mass_active_) finish_mass_window();
        offset_est_.emplace(sc_.estimation, t_);
        com_start_ = t_;
        phase_ = TaskPhase::kComWindow;
        break;
      case WaypointAction::kEndComWindow:
        close_com_window();
        phase_ = TaskPhase::kPlace;
        break;
      case WaypointAction::kRelease:
        commanded_tcp_ = seq_.waypoints()[idx].position;
        actual_tcp_ = plant_.p_tcp;
        if (sc_.replay.actual_tcp_xy) {
          actual_tcp_->x() = sc_.replay.actual_tcp_xy->x();
          actual_tcp_->y() = sc_.replay.actual_tcp_xy->y();
        }
        attached_ = false;
        phase_ = TaskPhase::kRetreat;
        break;
    }
  }

  void finish_mass_window() {
    mass_active_ = false;
    try {
      mass_ = mass_est_.finalize();
    } catch (const InsufficientSamples&) {
      mass_ = MassEstimate{};
    }
    if (!mass_.valid) flags_.emplace_back("mass_estimate_invalid");
    mass_done_ = true;
    if (phase_ == TaskPhase::kMassWindow) phase_ = TaskPhase::kTransport;
  }

  void close_com_window() {
    com_end_ = t_;
    const bool mandatory = sc_.correction == CorrectionMode::kMandatory;
    const bool replayed = sc_.replay.estimated_offset.has_value();
    bool usable = false;
    try {
      offset_ = offset_est_->close(t_);
      have_offset_ = true;
      filtered_series_.push_back({t_, offset_.r_hat_filtered});
      usable = offset_.identifiable;
      if (!usable) {
        flags_.emplace_back("offset_unidentifiable");
        if (mandatory && !replayed) {
          throw TaskAborted(AbortReason::kNotIdentifiable,
                            "stacked offset system has rank " + std::to_string(offset_.rank));
        }
      }
    } catch (const InsufficientSamples& e) {
      flags_.emplace_back("offset_insufficient_samples");
      if (mandatory && !replayed) throw TaskAborted(AbortReason::kInsufficientSamples, e.what());
    }

    if (replayed) {
      r_estimate_ = *sc_.replay.estimated_offset;
      usable = true;
    } else if (have_offset_) {
      r_estimate_ = offset_.r_hat_filtered;
    }

    Vec3 r_used = Vec3::Zero();
    if (sc_.correction != CorrectionMode::kOff) {
      if (usable) {
        r_used = r_estimate_;
        correction_applied_ = true;
      } else {
        flags_.emplace_back("zero_correction_fallback");
      }
    }
    seq_.set_place_target(place_target(r_used));
  }

  Vec3 compensation_force() const {
    if (!attached_ || sc_.compensation == CompensationMode::kOff) return Vec3::Zero();
    double m = 0.0;
    if (sc_.compensation == CompensationMode::kKnown) {
      m = sc_.payload.mass;
    } else if (mass_done_ && mass_.valid) {
      m = mass_.m_hat;
    } else {
      return Vec3::Zero();
    }
    return payload_force_estimate(m * sc_.mass_scale, plant_.a_tcp, sc_.gravity.g_vec());
  }

  void step() {
    const Vec3 p_ref = seq_.reference();

    if (attached_ && sc_.angular_perturbation) {
      const auto& ap = *sc_.angular_perturbation;
      const double w = 2.0 * std::numbers::pi * ap.frequency;
      const double tau = t_ - t_grasp_;
      const Vec3 axis = ap.axis.normalized();
      plant_.alpha = axis * (ap.amplitude * std::sin(w * tau));
      plant_.omega = axis * (ap.amplitude / w * (1.0 - std::cos(w * tau)));
    } else {
      plant_.omega.setZero();
      plant_.alpha.setZero();
    }

    Wrench truth;
    if (attached_) truth = synthesize_wrench(plant_, sc_.payload, sc_.gravity);
    const auto ku = static_cast<std::size_t>(k_);
    const Wrench meas =
        ku < sc_.replay.wrench_stream.size() ? sc_.replay.wrench_stream[ku] : sensor_.sample(truth);

    if (mass_active_) {
      if (k_ - mass_start_ >= mass_steps_) {
        finish_mass_window();
      } else {
        mass_est_.add(meas.force.z(), plant_.a_tcp.z(), sc_.gravity.g_scalar);
      }
    }
    if (offset_est_ && phase_ == TaskPhase::kComWindow) {
      offset_est_->add(t_, meas.force, meas.moment);
      if (offset_est_->has_estimate()) {
        filtered_series_.push_back({t_, offset_est_->estimate().r_hat_filtered});
      }
      const double e = plant_.p_tcp.x() - shadow_.p_a.x();
      tcp_err_sq_ += e * e;
      ++tcp_err_n_;
    }

    const Vec3 f_exc = compensation_force();

    LogRow row;
    row.t = t_;
    row.phase = phase_;
    row.p_ref = p_ref;
    row.p_a = ctrl_.p_a;
    row.v_a = ctrl_.v_a;
    row.p_tcp = plant_.p_tcp;
    row.p_ideal = shadow_.p_a;
    row.measured = meas;
    row.truth = truth;
    row.f_exc = f_exc;
    row.m_hat = mass_done_ ? mass_.m_hat : kNaN;
    const bool est = offset_est_ && offset_est_->has_estimate();
    row.r_hat_raw = est ? offset_est_->estimate().r_hat_raw : nan3();
    row.r_hat_filtered = est ? offset_est_->estimate().r_hat_filtered : nan3();
    row.r_true = sc_.payload.com_offset;
    log_.rows.push_back(row);

    ctrl_.f_exc = f_exc;
    const Vec3 accel = admittance_accel(ctrl_, Wrench{-meas.force, -meas.moment}, sc_.gains, p_ref);
    ctrl_ = integrate_controller(ctrl_, accel, sc_.dt);

    const Vec3 residual = meas.force - truth.force;
    const Vec3 accel_ideal =
        admittance_accel(shadow_, Wrench{-residual, Vec3::Zero()}, sc_.gains, p_ref);
    shadow_ = integrate_controller(shadow_, accel_ideal, sc_.dt);

    plant_ = step_plant(plant_, ctrl_.v_a, sc_.dt, sc_.tracking_lag);

    if (exceeds(ctrl_.p_a) || exceeds(ctrl_.v_a) || exceeds(ctrl_.a_a) || exceeds(plant_.p_tcp) ||
        exceeds(plant_.v_tcp) || exceeds(plant_.a_tcp) || exceeds(f_exc) || exceeds(shadow_.p_a)) {
      throw NumericalDivergence("state magnitude exceeded 1e6 at t=" + std::to_string(t_) + " s");
    }
  }

  TaskReport build_report() {
    TaskReport rep;
    rep.mass_estimate = mass_;
    rep.offset_estimate = offset_;
    rep.correction_applied = correction_applied_;

    const Vec3& r = sc_.payload.com_offset;
    if (!filtered_series_.empty()) {
      rep.offset_rmse_x = offset_rmse(filtered_series_, r, com_start_, com_end_, 0);
    } else {
      rep.offset_rmse_x = kNaN;
    }
    rep.tcp_rmse_x =
        tcp_err_n_ > 0 ? std::sqrt(tcp_err_sq_ / static_cast<double>(tcp_err_n_)) : kNaN;

    PlacementResult pr;
    pr.ideal_correction = Vec3(-r.x(), -r.y(), 0.0);
    pr.estimated_correction = Vec3(-r_estimate_.x(), -r_estimate_.y(), 0.0);
    pr.ideal_corrected_tcp = place_target(r);
    if (actual_tcp_) {
      pr.commanded_tcp = commanded_tcp_;
      pr.actual_tcp = *actual_tcp_;
    }
    pr.object_com_final_x = pr.actual_tcp.x() + r.x();
    pr.implemented_com_x = sc_.plan.place_nominal.x() - pr.actual_tcp.x();
    rep.placement = placement_errors(pr);

    const auto eq = evaluate_equilibrium(pr.object_com_final_x, sc_.plan.support_x,
                                         sc_.plan.support_half_width);
    rep.stable = eq.stable;
    rep.margin = eq.margin;
    rep.flags = flags_;
    return rep;
  }

  const Scenario& sc_;
  KinematicState plant_;
  ControllerState ctrl_;
  ControllerState shadow_;
  ForceTorqueSensor sensor_;
  WaypointSequencer seq_;
  TrajectoryLog log_;

  long k_ = 0;
  double t_ = 0.0;
  TaskPhase phase_ = TaskPhase::kApproach;
  bool attached_ = false;
  double t_grasp_ = 0.0;

  MassEstimator mass_est_;
  MassEstimate mass_;
  bool mass_active_ = false;
  bool mass_done_ = false;
  long mass_start_ = 0;
  long mass_steps_ = 1;

  std::optional<OffsetEstimator> offset_est_;
  OffsetEstimate offset_;
  bool have_offset_ = false;
  Vec3 r_estimate_ = Vec3::Zero();
  bool correction_applied_ = false;
  double com_start_ = 0.0;
  double com_end_ = 0.0;
  std::vector<TimedVec3> filtered_series_;
  double tcp_err_sq_ = 0.0;
  std::size_t tcp_err_n_ = 0;

  Vec3 commanded_tcp_ = Vec3::Zero();
  std::optional<Vec3> actual_tcp_;
  std::vector<std::string> flags_;
};

}  // namespace

std::string_view to_string(TaskPhase p) {
  switch (p) {
    case TaskPhase::kApproach: return "approach";
    case TaskPhase::kMassWindow: return "mass_window";
    case TaskPhase::kTransport: return "transport";
    case TaskPhase::kComWindow: return "com_window";
    case TaskPhase::kPlace: return "place";
    case TaskPhase::kRetreat: return "retreat";
  }
  return "unknown";
}

void validate(const Scenario& s) {
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ConfigError("dt_s", "must be > 0");
  if (!(s.tracking_lag >= 0.0)) throw ConfigError("tracking_lag_s", "must be >= 0");
  if (!(s.payload.mass >= 0.0) || !std::isfinite(s.payload.mass)) {
    throw ConfigError("payload.mass_kg", "must be >= 0");
  }
  if (!s.payload.com_offset.allFinite()) throw ConfigError("payload.com_offset_m", "must be finite");
  const Mat3& I = s.payload.inertia;
  if (!I.allFinite() || (I - I.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("payload.inertia_kgm2", "must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Mat3>(I).eigenvalues().minCoeff() < -1e-12) {
    throw ConfigError("payload.inertia_kgm2", "must be positive semidefinite");
  }
  if (!std::isfinite(s.gravity.g_scalar)) throw ConfigError("gravity_mps2", "must be finite");
  if (!valid(s.sensor)) throw ConfigError("sensor", "stds must be >= 0 and biases finite");
  if (!valid(s.gains)) throw ConfigError("gains", "diagonals must be finite and > 0");
  if (s.angular_perturbation) {
    const auto& ap = *s.angular_perturbation;
    if (!std::isfinite(ap.amplitude)) throw ConfigError("angular_perturbation.amp", "must be finite");
    if (!(ap.frequency > 0.0)) throw ConfigError("angular_perturbation.freq", "must be > 0");
    if (!(ap.axis.norm() > 0.0)) throw ConfigError("angular_perturbation.axis", "must be nonzero");
  }
  const auto& e = s.estimation;
  if (!(e.guard_eps >= 0.0)) throw ConfigError("estimation.guard_eps_mps2", "must be >= 0");
  if (!(e.force_floor >= 0.0)) throw ConfigError("estimation.force_floor_N", "must be >= 0");
  if (e.resolve_every < 1) throw ConfigError("estimation.resolve_every_steps", "must be >= 1");
  if (!(e.filter_alpha >= 0.0 && e.filter_alpha <= 1.0)) {
    throw ConfigError("estimation.filter_alpha", "must lie in [0, 1]");
  }
  if (!(s.mass_scale >= 0.0) || !std::isfinite(s.mass_scale)) {
    throw ConfigError("compensation.mass_scale", "must be >= 0");
  }
  if (!(s.settle_velocity > 0.0)) throw ConfigError("controller.settle_velocity_mps", "must be > 0");
  if (!(s.waypoint_timeout > 0.0)) throw ConfigError("controller.waypoint_timeout_s", "must be > 0");
  if (s.start && !s.start->allFinite()) throw ConfigError("start_m", "must be finite");
  validate(s.plan);
}

SimOutcome simulate(const Scenario& scenario) {
  validate(scenario);
  return Engine(scenario).run();
}

SimResult run_simulation(const Scenario& scenario) {
  SimOutcome out = simulate(scenario);
  if (out.abort) throw TaskAborted(*out.abort, out.abort_detail);
  return {std::move(out.report), std::move(out.log)};
}

std::vector<Vec3> ideal_admittance_trace(const Scenario& scenario) {
  const SimResult res = run_simulation(scenario);
  std::vector<Vec3> trace;
  trace.reserve(res.log.rows.size());
  for (const auto& row : res.log.rows) trace.push_back(row.p_ideal);
  return trace;
}

}  // namespace wrenchsim
