#include "wrenchsim/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "wrenchsim/errors.hpp"
#include "wrenchsim/sensing.hpp"

namespace wrenchsim {

std::optional<double> estimate_mass_sample(double f_pz, double a_z, double g_scalar,
                                           double guard_eps) {
  const double denom = a_z - g_scalar;
  if (!(std::abs(denom) > guard_eps) || !std::isfinite(f_pz)) return std::nullopt;
  return f_pz / denom;
}

MassEstimate finalize_mass(std::span<const double> samples, std::size_t min_samples) {
  const std::size_t need = std::max<std::size_t>(min_samples, 1);
  if (samples.size() < need) throw InsufficientSamples(samples.size(), need);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  MassEstimate est;
  est.m_hat = median;
  est.sample_count = n;
  est.valid = std::isfinite(median) && median > 0.0;
  return est;
}

Vec3 payload_force_estimate(double m_hat, const Vec3& a_tcp, const Vec3& g_vec) {
  return m_hat * (a_tcp - g_vec);
}

bool accumulate_offset_sample(OffsetBuffer& buf, double t, const Vec3& f, const Vec3& tau,
                              double force_floor) {
  if (t < buf.window_start || t > buf.window_end) throw OutsideWindow(t);
  if (!(f.norm() >= force_floor)) return false;
  buf.system.append(-skew(f), tau);
  return true;
}

OffsetEstimate solve_offset(const OffsetBuffer& buf) {
  const std::size_t need = std::max<std::size_t>(buf.min_samples, 1);
  if (buf.system.sample_count() < need) {
    throw InsufficientSamples(buf.system.sample_count(), need);
  }
  const LeastSquaresResult ls = solve_least_squares(buf.system);
  OffsetEstimate est;
  est.r_hat_raw = ls.solution;
  est.r_hat_filtered = ls.solution;
  est.rank = ls.rank;
  est.residual_norm = ls.residual_norm;
  est.identifiable = ls.rank == 3;
  est.sample_count = buf.system.sample_count();
  return est;
}

double offset_rmse(std::span<const TimedVec3> estimates, const Vec3& reference, double t0,
                   double t1, int axis) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : estimates) {
    if (e.t < t0 || e.t > t1) continue;
    const double d = e.value[axis] - reference[axis];
    sum += d * d;
    ++n;
  }
  if (n == 0) throw EmptyWindow();
  return std::sqrt(sum / static_cast<double>(n));
}

bool MassEstimator::add(double f_pz, double a_z, double g_scalar) {
  const auto m = estimate_mass_sample(f_pz, a_z, g_scalar, cfg_.guard_eps);
  if (!m) {
    ++rejected_;
    return false;
  }
  samples_.push_back(*m);
  return true;
}

OffsetEstimator::OffsetEstimator(const EstimationConfig& cfg, double window_start) : cfg_(cfg) {
  buf_.window_start = window_start;
  buf_.min_samples = cfg.min_offset_samples;
}

void OffsetEstimator::add(double t, const Vec3& f, const Vec3& tau) {
  accumulate_offset_sample(buf_, t, f, tau, cfg_.force_floor);
  ++steps_since_solve_;
  if (steps_since_solve_ >= cfg_.resolve_every &&
      buf_.system.sample_count() >= std::max<std::size_t>(buf_.min_samples, 1)) {
    resolve();
  } else if (has_estimate_) {
    estimate_.r_hat_filtered =
        lowpass(estimate_.r_hat_filtered, estimate_.r_hat_raw, cfg_.filter_alpha);
  }
}

void OffsetEstimator::resolve() {
  OffsetEstimate fresh = solve_offset(buf_);
  if (has_estimate_) {
    fresh.r_hat_filtered = lowpass(estimate_.r_hat_filtered, fresh.r_hat_raw, cfg_.filter_alpha);
  }
  estimate_ = fresh;
  has_estimate_ = true;
  steps_since_solve_ = 0;
}

const OffsetEstimate& OffsetEstimator::close(double t) {
  buf_.window_end = t;
  if (steps_since_solve_ > 0 || !has_estimate_) resolve();
  return estimate_;
}

}  // namespace wrenchsim
