#pragma once

#include <cstdint>
#include <random>

#include "wrenchsim/numerics.hpp"
#include "wrenchsim/sensing_types.hpp"

namespace wrenchsim {

struct SensorConfig {
  double sigma_f = 0.0;    // N, per axis
  double sigma_tau = 0.0;  // N*m, per axis
  Vec3 bias_f = Vec3::Zero();
  Vec3 bias_tau = Vec3::Zero();
  std::uint64_t seed = 0;
};

bool valid(const SensorConfig& cfg);

/// Wrist force/torque sensor: additive constant bias plus independent
/// zero-mean Gaussian noise per axis. Six standard normals are drawn per
/// sample regardless of the configured stds, so the stream for a given seed
/// does not depend on which stds are zero.
class ForceTorqueSensor {
 public:
  explicit ForceTorqueSensor(const SensorConfig& cfg);

  Wrench sample(const Wrench& true_wrench);
  const SensorConfig& config() const noexcept { return cfg_; }

 private:
  SensorConfig cfg_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Exponential moving average: alpha * current + (1 - alpha) * previous.
Vec3 lowpass(const Vec3& previous, const Vec3& current_raw, double alpha);

}  // namespace wrenchsim
