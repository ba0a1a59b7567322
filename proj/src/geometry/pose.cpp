// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/geometry/pose.hpp"

#include <cmath>

#include "usdrecon/error.hpp"

namespace usdrecon {

Pose Pose::from_yaw(double yaw_rad, const Vec3& t) {
  return {t, Eigen::Quaterniond(Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ()))};
}

Pose Pose::from_xyzw(const Vec3& t, const std::array<double, 4>& q) {
  Eigen::Quaterniond quat(q[3], q[0], q[1], q[2]);
  const double n = quat.norm();
  if (!std::isfinite(n) || n == 0.0 || !t.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "pose has a zero or non-finite component");
  }
  quat.coeffs() /= n;
  return {t, quat};
}

std::array<double, 4> Pose::quat_xyzw() const {
  return {rotation.x(), rotation.y(), rotation.z(), rotation.w()};
}

Eigen::Isometry3d Pose::isometry() const {
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = rotation.toRotationMatrix();
  iso.translation() = translation;
  return iso;
}

double Pose::yaw() const {
  const Vec3 x = rotation * Vec3::UnitX();
  return std::atan2(x.y(), x.x());
}

void validate_pose(const Pose& pose, double tol) {
  if (!pose.translation.allFinite() || !pose.rotation.coeffs().allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "pose has non-finite components");
  }
  if (std::abs(pose.rotation.norm() - 1.0) > tol) {
    throw Error(ErrorCode::kInvalidInput, "pose quaternion is not unit-norm");
  }
}

Pose compose(const Pose& a, const Pose& b) {
  validate_pose(a, 1e-6);
  validate_pose(b, 1e-6);
  Pose out;
  out.rotation = (a.rotation * b.rotation).normalized();
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose inverse(const Pose& p) {
  validate_pose(p, 1e-6);
  Pose out;
  out.rotation = p.rotation.conjugate().normalized();
  out.translation = -(out.rotation * p.translation);
  return out;
}

double rotation_angle_between(const Pose& a, const Pose& b) {
  return a.rotation.angularDistance(b.rotation);
}

}  // namespace usdrecon
