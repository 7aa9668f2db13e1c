#pragma once

#include <stdexcept>
#include <string>

namespace wrenchsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySystem : public Error {
 public:
  EmptySystem() : Error("least-squares system has no samples") {}
};

class NonpositiveTimestep : public Error {
 public:
  explicit NonpositiveTimestep(double dt)
      : Error("timestep must be positive, got " + std::to_string(dt)) {}
};

class InsufficientSamples : public Error {
 public:
  InsufficientSamples(std::size_t have, std::size_t need)
      : Error("insufficient samples: have " + std::to_string(have) + ", need " +
              std::to_string(need)) {}
};

class OutsideWindow : public Error {
 public:
  explicit OutsideWindow(double t)
      : Error("sample at t=" + std::to_string(t) + " s lies outside the measurement window") {}
};

class EmptyWindow : public Error {
 public:
  EmptyWindow() : Error("no estimates inside the requested window") {}
};

class NumericalDivergence : public Error {
 public:
  explicit NumericalDivergence(const std::string& what) : Error("numerical divergence: " + what) {}
};

// Scenario or replay document rejected. `field` is a dotted path such as
// "plan.waypoints[2].tolerance_m".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : Error(field.empty() ? msg : field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class AbortReason { kWaypointTimeout, kNotIdentifiable, kInsufficientSamples };

inline const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::kWaypointTimeout: return "WaypointTimeout";
    case AbortReason::kNotIdentifiable: return "NotIdentifiable";
    case AbortReason::kInsufficientSamples: return "InsufficientSamples";
  }
  return "Unknown";
}

class TaskAborted : public Error {
 public:
  TaskAborted(AbortReason reason, const std::string& detail)
      : Error(std::string("task aborted (") + to_string(reason) + "): " + detail), reason_(reason) {}
  AbortReason reason() const noexcept { return reason_; }

 private:
  AbortReason reason_;
};

}  // namespace wrenchsim
