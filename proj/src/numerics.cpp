#include "wrenchsim/numerics.hpp"

#include <Eigen/SVD>

#include "wrenchsim/errors.hpp"

namespace wrenchsim {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return Vec3(a.y() * b.z() - a.z() * b.y(),
              a.z() * b.x() - a.x() * b.z(),
              a.x() * b.y() - a.y() * b.x());
}

bool all_finite(const Vec3& v) { return v.allFinite(); }

LeastSquaresResult solve_least_squares(const StackedSystem& sys) {
  const auto n = static_cast<Eigen::Index>(sys.sample_count());
  if (n == 0) throw EmptySystem();

  Eigen::MatrixX3d a(3 * n, 3);
  Eigen::VectorXd b(3 * n);
  Eigen::Index row = 0;
  for (const auto& blk : sys.blocks()) {
    a.middleRows<3>(row) = blk.coeff;
    b.segment<3>(row) = blk.rhs;
    row += 3;
  }

  Eigen::JacobiSVD<Eigen::MatrixX3d> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);

  LeastSquaresResult out;
  out.rank = static_cast<int>(svd.rank());
  if (out.rank > 0) {
    out.solution = svd.solve(b);
  }
  out.residual_norm = (a * out.solution - b).norm();
  return out;
}

}  // namespace wrenchsim
