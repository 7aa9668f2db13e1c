#include "wrenchsim/sensing.hpp"

#include <stdexcept>

namespace wrenchsim {

bool valid(const SensorConfig& cfg) {
  return cfg.sigma_f >= 0.0 && cfg.sigma_tau >= 0.0 && all_finite(cfg.bias_f) &&
         all_finite(cfg.bias_tau);
}

ForceTorqueSensor::ForceTorqueSensor(const SensorConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
  if (!valid(cfg)) throw std::invalid_argument("invalid sensor configuration");
}

Wrench ForceTorqueSensor::sample(const Wrench& true_wrench) {
  Vec3 nf;
  Vec3 nt;
  for (int i = 0; i < 3; ++i) nf[i] = normal_(rng_);
  for (int i = 0; i < 3; ++i) nt[i] = normal_(rng_);

  Wrench out;
  out.force = true_wrench.force + cfg_.bias_f + cfg_.sigma_f * nf;
  out.moment = true_wrench.moment + cfg_.bias_tau + cfg_.sigma_tau * nt;
  return out;
}

Vec3 lowpass(const Vec3& previous, const Vec3& current_raw, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("lowpass alpha must lie in [0, 1]");
  return alpha * current_raw + (1.0 - alpha) * previous;
}

}  // namespace wrenchsim
