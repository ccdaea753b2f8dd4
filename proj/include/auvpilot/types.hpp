#pragma once

#include <Eigen/Dense>

namespace auvpilot {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Pose eta = [x y z phi theta psi]: NED position (z down, depth positive)
/// and ZYX Euler attitude. Body velocity nu = [u v w p q r].
struct VehicleState {
  Vec6 eta = Vec6::Zero();
  Vec6 nu = Vec6::Zero();
};

/// Cross-product matrix: skew(a) * b == a x b.
inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -a.z(),  a.y(),
        a.z(),    0.0, -a.x(),
       -a.y(),  a.x(),    0.0;
  // clang-format on
  return s;
}

}  // namespace auvpilot
