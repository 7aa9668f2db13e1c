#include <doctest.h>

#include <cmath>
#include <string>

#include "wrenchsim/errors.hpp"
#include "wrenchsim/scenario_io.hpp"
#include "wrenchsim/sim.hpp"

using namespace wrenchsim;

namespace {

Scenario fixture(const std::string& name) {
  return load_scenario(std::string(WRENCHSIM_SOURCE_DIR) + "/scenarios/" + name).scenario;
}

bool same(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    if (std::isnan(a[i]) != std::isnan(b[i])) return false;
    if (!std::isnan(a[i]) && a[i] != b[i]) return false;
  }
  return true;
}

bool same(const LogRow& a, const LogRow& b) {
  const bool m_hat = (std::isnan(a.m_hat) && std::isnan(b.m_hat)) || a.m_hat == b.m_hat;
  return a.t == b.t && a.phase == b.phase && m_hat && same(a.p_ref, b.p_ref) &&
         same(a.p_a, b.p_a) && same(a.v_a, b.v_a) && same(a.p_tcp, b.p_tcp) &&
         same(a.p_ideal, b.p_ideal) && same(a.measured.force, b.measured.force) &&
         same(a.measured.moment, b.measured.moment) && same(a.truth.force, b.truth.force) &&
         same(a.truth.moment, b.truth.moment) && same(a.f_exc, b.f_exc) &&
         same(a.r_hat_raw, b.r_hat_raw) && same(a.r_hat_filtered, b.r_hat_filtered) &&
         same(a.r_true, b.r_true);
}

void loosen_tolerances(Scenario& sc, double tol) {
  for (std::size_t i = 3; i < sc.plan.waypoints.size(); ++i) sc.plan.waypoints[i].tolerance = tol;
}

std::size_t first_row_after_mass_window(const TrajectoryLog& log) {
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    if (!std::isnan(log.rows[k].m_hat)) return k;
  }
  return log.rows.size();
}

}  // namespace

TEST_CASE("noiseless reference run matches the end-to-end oracle") {
  const SimResult res = run_simulation(fixture("reference.json"));
  const TaskReport& r = res.report;
  CHECK((r.offset_estimate.r_hat_raw - Vec3(0.085, 0, 0)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((r.offset_estimate.r_hat_filtered - Vec3(0.085, 0, 0)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(r.placement.object_com_final_x - (-0.3)) <= 1e-6);
  CHECK(r.offset_rmse_x <= 1e-9);
  CHECK(r.stable);
  CHECK(r.flags.empty());
}

TEST_CASE("identical scenarios give bit-identical logs") {
  for (const char* name : {"reference.json", "noisy.json", "perturbed.json"}) {
    const Scenario sc = fixture(name);
    const SimOutcome a = simulate(sc);
    const SimOutcome b = simulate(sc);
    REQUIRE(a.log.rows.size() == b.log.rows.size());
    bool all_same = true;
    for (std::size_t k = 0; k < a.log.rows.size(); ++k) all_same &= same(a.log.rows[k], b.log.rows[k]);
    CHECK(all_same);
  }
}

TEST_CASE("different seeds give different noisy logs") {
  Scenario sc = fixture("noisy.json");
  const SimOutcome a = simulate(sc);
  sc.seed += 1;
  const SimOutcome b = simulate(sc);
  CHECK(a.log.rows[10].measured.force != b.log.rows[10].measured.force);
}

TEST_CASE("log timestamps lie exactly on the grid") {
  const Scenario sc = fixture("reference.json");
  const SimResult res = run_simulation(sc);
  REQUIRE_FALSE(res.log.rows.empty());
  CHECK(res.log.dt == sc.dt);
  bool on_grid = true;
  for (std::size_t k = 0; k < res.log.rows.size(); ++k) {
    on_grid &= res.log.rows[k].t == static_cast<double>(k) * sc.dt;
  }
  CHECK(on_grid);
}

TEST_CASE("halving dt barely moves the placement") {
  Scenario sc = fixture("reference.json");
  const Vec3 coarse = run_simulation(sc).report.placement.actual_tcp;
  sc.dt /= 2.0;
  const Vec3 fine = run_simulation(sc).report.placement.actual_tcp;
  CHECK((coarse - fine).norm() < 1e-4);
}

TEST_CASE("without perturbation the payload moment is r x f on every step") {
  const SimResult res = run_simulation(fixture("reference.json"));
  double worst = 0.0;
  for (const LogRow& row : res.log.rows) {
    worst = std::max(worst, (row.truth.moment - row.r_true.cross(row.truth.force)).norm());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("perturbation adds rotational moment while attached") {
  const SimResult res = run_simulation(fixture("perturbed.json"));
  double worst = 0.0;
  for (const LogRow& row : res.log.rows) {
    worst = std::max(worst, (row.truth.moment - row.r_true.cross(row.truth.force)).norm());
  }
  CHECK(worst > 1e-4);
}

TEST_CASE("zero payload tracks every waypoint") {
  Scenario sc = fixture("reference.json");
  sc.payload.mass = 0.0;
  sc.correction = CorrectionMode::kOptional;
  const SimResult res = run_simulation(sc);
  const auto& rows = res.log.rows;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (rows[k + 1].p_ref != rows[k].p_ref) {
      const double err = (rows[k].p_a - rows[k].p_ref).norm();
      CHECK(err <= 2e-3);
    }
  }
  const auto ideal = ideal_admittance_trace(sc);
  REQUIRE(ideal.size() == rows.size());
  bool identical = true;
  for (std::size_t k = 0; k < rows.size(); ++k) identical &= ideal[k] == rows[k].p_a;
  CHECK(identical);
}

TEST_CASE("known mass keeps the controller on the ideal trace") {
  Scenario sc = fixture("reference.json");
  sc.compensation = CompensationMode::kKnown;
  const SimResult res = run_simulation(sc);
  const std::size_t k0 = first_row_after_mass_window(res.log);
  REQUIRE(k0 < res.log.rows.size());
  double worst = 0.0;
  for (std::size_t k = k0; k < res.log.rows.size(); ++k) {
    worst = std::max(worst, (res.log.rows[k].p_a - res.log.rows[k].p_ideal).norm());
  }
  CHECK(worst <= 1e-9);
  CHECK(res.report.tcp_rmse_x <= 1e-9);
}

TEST_CASE("noiseless estimated mass also tracks the ideal trace after the window") {
  const SimResult res = run_simulation(fixture("reference.json"));
  const std::size_t k0 = first_row_after_mass_window(res.log);
  double worst = 0.0;
  for (std::size_t k = k0; k < res.log.rows.size(); ++k) {
    worst = std::max(worst, std::abs(res.log.rows[k].p_a.z() - res.log.rows[k].p_ideal.z()));
  }
  const double sag = 9.81 / 200.0;
  CHECK(worst < sag);
}

TEST_CASE("biased mass estimate moves the trace away from the ideal") {
  Scenario sc = fixture("reference.json");
  sc.mass_scale = 1.1;
  loosen_tolerances(sc, 0.01);
  const SimResult res = run_simulation(sc);
  CHECK(res.report.tcp_rmse_x > 0.0);

  Scenario unbiased = sc;
  unbiased.mass_scale = 1.0;
  const SimResult ref = run_simulation(unbiased);
  CHECK(res.report.tcp_rmse_x > 10.0 * ref.report.tcp_rmse_x);

  const LogRow* placed = nullptr;
  for (const auto& row : res.log.rows) {
    if (row.phase == TaskPhase::kPlace) placed = &row;
  }
  REQUIRE(placed != nullptr);
  const double residual = 0.1 * sc.payload.mass * 9.81 / sc.gains.stiffness.z();
  CHECK(std::abs((placed->p_a - placed->p_ideal).z() - residual) <= 1e-4);
}

TEST_CASE("log fills estimates only once they exist") {
  const SimResult res = run_simulation(fixture("reference.json"));
  const LogRow& first = res.log.rows.front();
  CHECK(std::isnan(first.m_hat));
  CHECK(std::isnan(first.r_hat_raw.x()));
  const LogRow& last = res.log.rows.back();
  CHECK(last.m_hat == doctest::Approx(1.0));
  CHECK(last.r_hat_raw.x() == doctest::Approx(0.085));
  CHECK(last.phase == TaskPhase::kRetreat);
}

TEST_CASE("gains far outside the stable region raise divergence") {
  Scenario sc = fixture("reference.json");
  sc.gains.inertia = Vec3::Constant(1e-4);
  CHECK_THROWS_AS(simulate(sc), NumericalDivergence);
}

TEST_CASE("unreachable waypoint aborts with a timeout") {
  Scenario sc = fixture("reference.json");
  sc.compensation = CompensationMode::kOff;
  sc.waypoint_timeout = 2.0;
  const SimOutcome out = simulate(sc);
  REQUIRE(out.abort.has_value());
  CHECK(*out.abort == AbortReason::kWaypointTimeout);
  CHECK_FALSE(out.log.rows.empty());
  CHECK_THROWS_AS(run_simulation(sc), TaskAborted);
}

TEST_CASE("scenario validation names the field") {
  auto field = [](const Scenario& sc) {
    try {
      validate(sc);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  Scenario sc = fixture("reference.json");
  CHECK(field(sc).empty());
  Scenario bad = sc;
  bad.dt = 0.0;
  CHECK(field(bad) == "dt_s");
  bad = sc;
  bad.payload.mass = -1.0;
  CHECK(field(bad) == "payload.mass_kg");
  bad = sc;
  bad.payload.inertia(0, 1) = 0.1;
  CHECK(field(bad) == "payload.inertia_kgm2");
  bad = sc;
  bad.payload.inertia(0, 0) = -0.1;
  CHECK(field(bad) == "payload.inertia_kgm2");
  bad = sc;
  bad.sensor.sigma_tau = -1.0;
  CHECK(field(bad) == "sensor");
  bad = sc;
  bad.gains.stiffness.x() = 0.0;
  CHECK(field(bad) == "gains");
  bad = sc;
  bad.angular_perturbation = AngularPerturbation{1.0, 0.0, Vec3::UnitY()};
  CHECK(field(bad) == "angular_perturbation.freq");
  bad = sc;
  bad.estimation.filter_alpha = 2.0;
  CHECK(field(bad) == "estimation.filter_alpha");
}

TEST_CASE("tracking lag separates the plant from the controller") {
  Scenario sc = fixture("reference.json");
  sc.tracking_lag = 0.02;
  sc.plan.waypoints[6].tolerance = 0.002;
  const SimResult res = run_simulation(sc);
  double gap = 0.0;
  for (const auto& row : res.log.rows) gap = std::max(gap, (row.p_tcp - row.p_a).norm());
  CHECK(gap > 0.0);
  CHECK(std::abs(res.report.placement.object_com_final_x + 0.3) <= 2e-3);

  const SimResult ideal = run_simulation(fixture("reference.json"));
  bool locked = true;
  for (const auto& row : ideal.log.rows) locked &= row.p_tcp == row.p_a;
  CHECK(locked);
}

TEST_CASE("phase labels") {
  CHECK(to_string(TaskPhase::kApproach) == "approach");
  CHECK(to_string(TaskPhase::kComWindow) == "com_window");
  CHECK(to_string(TaskPhase::kRetreat) == "retreat");
}
