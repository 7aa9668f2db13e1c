#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wrenchsim/sim.hpp"

namespace wrenchsim {

/// A parsed scenario document. `stack_offsets` holds the optional per-layer
/// CoM offsets used by the stacking runner.
struct ScenarioDocument {
  Scenario scenario;
  std::vector<Vec3> stack_offsets;
};

/// Strict JSON scenario parsing: unknown keys, wrong types and out-of-range
/// values raise ConfigError with the dotted field path; syntax errors report
/// line and column.
ScenarioDocument parse_scenario(const std::string& text);
ScenarioDocument load_scenario(const std::filesystem::path& path);

/// Replay document: estimated_correction_mm [cx, cy], actual_tcp_mm [x, y],
/// wrench_csv (relative paths resolve against the replay file's directory).
Replay load_replay(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Wrench rows from a CSV holding f_meas_* and tau_meas_* columns (for
/// example a trajectory.csv written by write_trajectory_csv).
std::vector<Wrench> read_wrench_stream(const std::filesystem::path& path);

const std::vector<std::string>& trajectory_columns();
void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log);

/// %.9g formatting used for every numeric CSV field.
std::string format_number(double v);

/// report.json contents. Distances are in mm (value in m times 1000).
nlohmann::json report_to_json(const SimOutcome& outcome, const Scenario& scenario);

}  // namespace wrenchsim
