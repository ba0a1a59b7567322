// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/geometry/point_cloud.hpp"

#include <algorithm>
#include <limits>

#include "usdrecon/error.hpp"

namespace usdrecon {

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  PointCloud out = cloud;
  transform_in_place(out, pose);
  return out;
}

void transform_in_place(PointCloud& cloud, const Pose& pose) {
  validate_pose(pose, 1e-6);
  const Eigen::Matrix3d r = pose.rotation_matrix();
  for (Vec3& p : cloud.points) p = r * p + pose.translation;
}

Vec3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "centroid of empty cloud");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

void validate_cloud(const PointCloud& cloud) {
  for (const Vec3& p : cloud.points) {
    if (!p.allFinite()) throw Error(ErrorCode::kInvalidInput, "cloud contains non-finite point");
  }
}

double Aabb::volume() const {
  const Vec3 e = extent().cwiseMax(0.0);
  return e.x() * e.y() * e.z();
}

double Aabb::footprint_area() const {
  const Vec3 e = extent().cwiseMax(0.0);
  return e.x() * e.y();
}

bool Aabb::contains(const Vec3& p, double tol) const {
  return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
}

Aabb Aabb::inflated(double margin) const {
  const Vec3 m = Vec3::Constant(margin);
  return {min - m, max + m};
}

void Aabb::expand(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

Aabb aabb_of(const std::vector<Vec3>& points) {
  if (points.empty()) throw Error(ErrorCode::kEmptyCloud, "bounding box of empty cloud");
  Aabb box{points.front(), points.front()};
  for (const Vec3& p : points) box.expand(p);
  return box;
}

Aabb aabb_of(const PointCloud& cloud) { return aabb_of(cloud.points); }

Aabb transform_aabb(const Aabb& box, const Pose& pose) {
  std::vector<Vec3> corners;
  corners.reserve(8);
  for (int i = 0; i < 8; ++i) {
    const Vec3 c((i & 1) ? box.max.x() : box.min.x(), (i & 2) ? box.max.y() : box.min.y(),
                 (i & 4) ? box.max.z() : box.min.z());
    corners.push_back(pose.apply(c));
  }
  return aabb_of(corners);
}

double overlap_volume(const Aabb& a, const Aabb& b) {
  const Vec3 lo = a.min.cwiseMax(b.min);
  const Vec3 hi = a.max.cwiseMin(b.max);
  const Vec3 e = (hi - lo).cwiseMax(0.0);
  return e.x() * e.y() * e.z();
}

double overlap_area_xy(const Aabb& a, const Aabb& b) {
  const double w = std::min(a.max.x(), b.max.x()) - std::max(a.min.x(), b.min.x());
  const double h = std::min(a.max.y(), b.max.y()) - std::max(a.min.y(), b.min.y());
  return std::max(w, 0.0) * std::max(h, 0.0);
}

}  // namespace usdrecon
