// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>

namespace usdrecon {

using Vec3 = Eigen::Vector3d;

/// Rigid transform in SE(3): rotate, then translate. Quaternion components are
/// exchanged with the outside world in (qx, qy, qz, qw) order.
struct Pose {
  Vec3 translation = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {t, Eigen::Quaterniond::Identity()}; }
  static Pose from_yaw(double yaw_rad, const Vec3& t = Vec3::Zero());
  /// Builds a pose from (qx, qy, qz, qw); throws on a zero or non-finite quaternion.
  static Pose from_xyzw(const Vec3& t, const std::array<double, 4>& q);

  std::array<double, 4> quat_xyzw() const;
  Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }
  Eigen::Isometry3d isometry() const;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  /// Yaw of the rotated x axis about +z, in (-pi, pi].
  double yaw() const;
};

/// Throws kInvalidInput unless every component is finite and the quaternion
/// norm is within `tol` of one.
void validate_pose(const Pose& pose, double tol = 1e-9);

/// a * b: applies b first, then a. Result rotation is renormalized.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Angle of the relative rotation between two poses, radians in [0, pi].
double rotation_angle_between(const Pose& a, const Pose& b);

}  // namespace usdrecon
