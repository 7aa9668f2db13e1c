#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wrenchsim/numerics.hpp"

namespace wrenchsim {

struct EstimationConfig {
  double guard_eps = 0.5;          // m/s^2, free-fall guard on the mass denominator
  double force_floor = 1.0;        // N, smaller forces are not used for the offset
  std::size_t min_mass_samples = 10;
  std::size_t min_offset_samples = 50;
  std::size_t resolve_every = 50;  // control steps between offset re-solves
  double filter_alpha = 0.05;      // per control step
};

// ---------------------------------------------------------------------------
// Mass

struct MassEstimate {
  double m_hat = 0.0;
  std::size_t sample_count = 0;
  bool valid = false;
};

/// m = f_pz / (a_z - g). Returns nullopt when |a_z - g| <= guard_eps, i.e. the
/// sample sits in the free-fall band where the ratio is singular.
std::optional<double> estimate_mass_sample(double f_pz, double a_z, double g_scalar,
                                           double guard_eps);

/// Median of the accepted samples. Throws InsufficientSamples when fewer than
/// `min_samples` (at least one) are given.
MassEstimate finalize_mass(std::span<const double> samples, std::size_t min_samples = 1);

/// m_hat (a_tcp - g), the feedforward assigned to F_exc.
Vec3 payload_force_estimate(double m_hat, const Vec3& a_tcp, const Vec3& g_vec);

// ---------------------------------------------------------------------------
// CoM offset

struct OffsetBuffer {
  StackedSystem system;
  double window_start = 0.0;
  double window_end = std::numeric_limits<double>::infinity();
  std::size_t min_samples = 1;
};

/// Appends the block (-[f]x, tau) when |f| >= force_floor. Returns whether the
/// sample was kept. Throws OutsideWindow when t is not in the buffer window.
bool accumulate_offset_sample(OffsetBuffer& buf, double t, const Vec3& f, const Vec3& tau,
                              double force_floor);

struct OffsetEstimate {
  Vec3 r_hat_raw = Vec3::Zero();
  Vec3 r_hat_filtered = Vec3::Zero();
  int rank = 0;
  double residual_norm = 0.0;
  bool identifiable = false;
  std::size_t sample_count = 0;
};

/// Least-squares offset from the stacked samples. A rank-deficient system is
/// reported through `identifiable == false`, not thrown. The filtered field is
/// initialized to the raw solution. Throws InsufficientSamples.
OffsetEstimate solve_offset(const OffsetBuffer& buf);

struct TimedVec3 {
  double t = 0.0;
  Vec3 value = Vec3::Zero();
};

/// RMS error of one axis of an estimate series against a fixed reference,
/// over samples with t in [t0, t1]. Throws EmptyWindow.
double offset_rmse(std::span<const TimedVec3> estimates, const Vec3& reference, double t0,
                   double t1, int axis = 0);

// ---------------------------------------------------------------------------
// Staged online estimators driven by the simulation loop.

class MassEstimator {
 public:
  explicit MassEstimator(const EstimationConfig& cfg) : cfg_(cfg) {}

  // Returns whether the sample was accepted.
  bool add(double f_pz, double a_z, double g_scalar);
  MassEstimate finalize() const { return finalize_mass(samples_, cfg_.min_mass_samples); }
  std::size_t accepted() const noexcept { return samples_.size(); }
  std::size_t rejected() const noexcept { return rejected_; }

 private:
  EstimationConfig cfg_;
  std::vector<double> samples_;
  std::size_t rejected_ = 0;
};

/// Accumulates offset samples over a window, re-solves on a fixed cadence and
/// keeps a per-step EMA of the latest raw solution.
class OffsetEstimator {
 public:
  OffsetEstimator(const EstimationConfig& cfg, double window_start);

  void add(double t, const Vec3& f, const Vec3& tau);
  /// Closes the window at t and performs the final solve.
  /// Throws InsufficientSamples when the window collected too few samples.
  const OffsetEstimate& close(double t);

  bool has_estimate() const noexcept { return has_estimate_; }
  const OffsetEstimate& estimate() const noexcept { return estimate_; }
  const OffsetBuffer& buffer() const noexcept { return buf_; }

 private:
  void resolve();

  EstimationConfig cfg_;
  OffsetBuffer buf_;
  OffsetEstimate estimate_;
  bool has_estimate_ = false;
  std::size_t steps_since_solve_ = 0;
};

}  // namespace wrenchsim
