#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstddef>
#include <vector>

namespace wrenchsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Relative singular-value cutoff used to decide numerical rank.
inline constexpr double kRankTolerance = 1e-8;

/// Skew-symmetric matrix S with S * w == v x w.
Mat3 skew(const Vec3& v);

/// Right-handed cross product, written out componentwise.
Vec3 cross(const Vec3& a, const Vec3& b);

bool all_finite(const Vec3& v);

/// One 3-row block of a stacked linear system.
struct StackedBlock {
  Mat3 coeff;
  Vec3 rhs;
};

/// Stacked N*3 x 3 system A x = b, kept as a list of 3x3 blocks.
class StackedSystem {
 public:
  void append(const Mat3& coeff, const Vec3& rhs) { blocks_.push_back({coeff, rhs}); }
  void clear() { blocks_.clear(); }
  std::size_t sample_count() const noexcept { return blocks_.size(); }
  const std::vector<StackedBlock>& blocks() const noexcept { return blocks_; }

 private:
  std::vector<StackedBlock> blocks_;
};

struct LeastSquaresResult {
  Vec3 solution = Vec3::Zero();
  int rank = 0;
  double residual_norm = 0.0;
};

/// Minimum-norm least-squares solution of the stacked system.
///
/// Rank is the count of singular values above kRankTolerance times the
/// largest one. Rank-deficient systems are not an error: the minimum-norm
/// minimizer is returned and `rank` reports the deficiency.
///
/// Throws EmptySystem when the system has no blocks.
LeastSquaresResult solve_least_squares(const StackedSystem& sys);

}  // namespace wrenchsim
