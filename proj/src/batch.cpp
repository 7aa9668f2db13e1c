#include "wrenchsim/batch.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace wrenchsim {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) {
    out.mean = out.std = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace

TrialOutcome run_trial(const Scenario& scenario) {
  TrialOutcome out;
  try {
    SimOutcome sim = simulate(scenario);
    out.report = std::move(sim.report);
    if (sim.abort) {
      out.status = TrialStatus::kAborted;
      out.abort = sim.abort;
      out.detail = std::move(sim.abort_detail);
      return out;
    }
  } catch (const NumericalDivergence& e) {
    out.status = TrialStatus::kDiverged;
    out.detail = e.what();
    return out;
  }
  out.placement_error =
      std::abs(out.report.placement.object_com_final_x - scenario.plan.support_x);
  out.offset_error = (out.report.offset_estimate.r_hat_filtered - scenario.payload.com_offset).norm();
  return out;
}

std::vector<TrialOutcome> run_batch_serial(std::span<const Scenario> scenarios) {
  std::vector<TrialOutcome> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(run_trial(s));
  return out;
}

std::vector<TrialOutcome> run_batch_parallel(std::span<const Scenario> scenarios, int threads) {
  // Config errors would otherwise escape an OpenMP region.
  for (const auto& s : scenarios) validate(s);

  std::vector<TrialOutcome> out(scenarios.size());
  const auto n = static_cast<long>(scenarios.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = run_trial(scenarios[static_cast<std::size_t>(i)]);
  }
  return out;
}

int threads_from_env() {
  const char* v = std::getenv("WRENCHSIM_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 0) return 0;
  return static_cast<int>(n);
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) {
  if (name == "sensor.sigma_tau") return SweepParameter::kSigmaTau;
  if (name == "sensor.sigma_f") return SweepParameter::kSigmaF;
  if (name == "tracking_lag") return SweepParameter::kTrackingLag;
  if (name == "angular_perturbation.amp") return SweepParameter::kAngularAmplitude;
  return std::nullopt;
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kSigmaTau: return "sensor.sigma_tau";
    case SweepParameter::kSigmaF: return "sensor.sigma_f";
    case SweepParameter::kTrackingLag: return "tracking_lag";
    case SweepParameter::kAngularAmplitude: return "angular_perturbation.amp";
  }
  return "unknown";
}

Scenario with_parameter(Scenario base, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::kSigmaTau: base.sensor.sigma_tau = value; break;
    case SweepParameter::kSigmaF: base.sensor.sigma_f = value; break;
    case SweepParameter::kTrackingLag: base.tracking_lag = value; break;
    case SweepParameter::kAngularAmplitude:
      if (!base.angular_perturbation) base.angular_perturbation = AngularPerturbation{};
      base.angular_perturbation->amplitude = value;
      break;
  }
  return base;
}

std::vector<SweepRow> run_sweep(const Scenario& base, SweepParameter p,
                                std::span<const double> values, int trials_per_value, int threads,
                                bool parallel) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (trials_per_value < 1) throw std::invalid_argument("trials per value must be >= 1");

  std::vector<Scenario> batch;
  batch.reserve(values.size() * static_cast<std::size_t>(trials_per_value));
  for (double v : values) {
    for (int i = 0; i < trials_per_value; ++i) {
      Scenario s = with_parameter(base, p, v);
      s.seed = base.seed + static_cast<std::uint64_t>(i);
      batch.push_back(std::move(s));
    }
  }
  const auto outcomes = parallel ? run_batch_parallel(batch, threads) : run_batch_serial(batch);

  std::vector<SweepRow> rows;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    SweepRow row;
    row.value = values[vi];
    row.trials = trials_per_value;
    std::vector<double> rmse, place, off;
    for (int i = 0; i < trials_per_value; ++i) {
      const auto& o = outcomes[vi * static_cast<std::size_t>(trials_per_value) +
                               static_cast<std::size_t>(i)];
      if (o.status != TrialStatus::kCompleted) continue;
      ++row.completed;
      rmse.push_back(o.report.offset_rmse_x);
      place.push_back(o.placement_error);
      off.push_back(o.offset_error);
    }
    const auto r = mean_std(rmse);
    const auto pl = mean_std(place);
    row.mean_offset_rmse = r.mean;
    row.std_offset_rmse = r.std;
    row.mean_placement_error = pl.mean;
    row.std_placement_error = pl.std;
    row.mean_offset_error = mean_std(off).mean;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wrenchsim
