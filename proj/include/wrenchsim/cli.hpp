#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wrenchsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitAborted = 2;

struct CommonOptions {
  std::filesystem::path out_dir = ".";
  std::optional<long> seed_override;
  std::optional<double> dt;
  bool quiet = false;
};

int cmd_run(const std::filesystem::path& scenario_path, const CommonOptions& opts,
            const std::optional<std::filesystem::path>& replay_path, std::ostream& out,
            std::ostream& err);

int cmd_sweep(const std::filesystem::path& scenario_path, const std::string& parameter,
              const std::vector<double>& values, int trials_per_value, const CommonOptions& opts,
              std::ostream& out, std::ostream& err);

int cmd_stack(const std::filesystem::path& scenario_path, int layers, const CommonOptions& opts,
              std::ostream& out, std::ostream& err);

int cmd_plotdata(const std::filesystem::path& trajectory_csv,
                 const std::vector<std::string>& signals, const std::filesystem::path& out_path,
                 std::ostream& err);

/// Full command-line entry point; returns the process exit code (0, 1 or 2).
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wrenchsim::cli
