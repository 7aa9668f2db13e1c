#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wrenchsim/sim.hpp"

namespace wrenchsim {

enum class TrialStatus { kCompleted, kAborted, kDiverged };

struct TrialOutcome {
  TrialStatus status = TrialStatus::kCompleted;
  std::optional<AbortReason> abort;
  std::string detail;
  TaskReport report;
  // |object CoM x - support x| after release, m.
  double placement_error = 0.0;
  // |r_hat_filtered - r_true|, m.
  double offset_error = 0.0;
};

TrialOutcome run_trial(const Scenario& scenario);

/// Reference implementation: trials run one after another.
std::vector<TrialOutcome> run_batch_serial(std::span<const Scenario> scenarios);

/// Trials distributed over OpenMP threads; `threads` <= 0 lets the runtime
/// decide. Output order and contents match run_batch_serial exactly.
std::vector<TrialOutcome> run_batch_parallel(std::span<const Scenario> scenarios, int threads = 0);

/// Thread cap from WRENCHSIM_THREADS (0 or unset = auto).
int threads_from_env();

enum class SweepParameter { kSigmaTau, kSigmaF, kTrackingLag, kAngularAmplitude };

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name);
std::string_view to_string(SweepParameter p);

/// Copy of `base` with one parameter set. Sweeping the angular amplitude on a
/// scenario without perturbation enables one with default frequency and axis.
Scenario with_parameter(Scenario base, SweepParameter p, double value);

struct SweepRow {
  double value = 0.0;
  int trials = 0;
  int completed = 0;
  double mean_offset_rmse = 0.0;  // m, over completed trials
  double std_offset_rmse = 0.0;
  double mean_placement_error = 0.0;
  double std_placement_error = 0.0;
  double mean_offset_error = 0.0;
};

/// trials_per_value runs for each value, trial i seeded with base.seed + i.
/// Throws std::invalid_argument on an empty value list or trials < 1.
std::vector<SweepRow> run_sweep(const Scenario& base, SweepParameter p,
                                std::span<const double> values, int trials_per_value,
                                int threads = 0, bool parallel = true);

}  // namespace wrenchsim
