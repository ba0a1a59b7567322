// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/registration/camera.hpp"

#include <algorithm>
#include <cmath>

#include "usdrecon/error.hpp"

namespace usdrecon {

Pose optical_mount(const Vec3& offset) {
  Eigen::Matrix3d r;
  // Columns: camera x (right), y (down), z (forward) expressed in the body frame.
  r << 0.0, 0.0, 1.0,
      -1.0, 0.0, 0.0,
       0.0, -1.0, 0.0;
  return {offset, Eigen::Quaterniond(r).normalized()};
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidInput, "camera focal lengths and image size must be positive");
  }
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height)) {
    throw Error(ErrorCode::kInvalidInput, "principal point outside the image");
  }
  validate_pose(extrinsic, 1e-6);
}

Pose CameraModel::world_to_camera(const Pose& robot_pose) const {
  return inverse(compose(robot_pose, extrinsic));
}

std::optional<Vec2> CameraModel::project(const Vec3& p) const {
  if (!(p.z() > 0.0)) return std::nullopt;
  return Vec2(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
}

bool CameraModel::in_image(const Vec2& px) const {
  return px.x() >= 0.0 && px.x() <= width && px.y() >= 0.0 && px.y() <= height;
}

double polygon_area(const Polygon2& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

void validate_mask(const Polygon2& mask) {
  if (mask.size() < 3) throw Error(ErrorCode::kInvalidMask, "mask polygon needs three vertices");
  for (const Vec2& v : mask) {
    if (!v.allFinite()) throw Error(ErrorCode::kInvalidMask, "mask vertex is not finite");
  }
  if (std::abs(polygon_area(mask)) <= 1e-12) {
    throw Error(ErrorCode::kInvalidMask, "mask polygon has zero area");
  }
}

void validate_detection(const Detection& det, const CameraModel& camera) {
  validate_mask(det.mask);
  for (const Vec2& v : det.mask) {
    if (!camera.in_image(v)) throw Error(ErrorCode::kInvalidMask, "mask vertex outside the image");
  }
  if (!std::isfinite(det.confidence)) {
    throw Error(ErrorCode::kInvalidInput, "detection confidence is not finite");
  }
}

bool point_in_polygon(const Polygon2& poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    // On-edge points are excluded.
    const Vec2 ab = b - a;
    const Vec2 ap = p - a;
    const double cross = ab.x() * ap.y() - ab.y() * ap.x();
    const double scale = ab.norm();
    if (std::abs(cross) <= 1e-12 * std::max(scale, 1.0) && ap.dot(ab) >= 0.0 &&
        ap.dot(ab) <= ab.squaredNorm()) {
      return false;
    }
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

Polygon2 convex_hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  Polygon2 hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<std::size_t> masked_point_indices(const PointCloud& world_cloud,
                                              const CameraModel& camera,
                                              const Pose& robot_pose, const Polygon2& mask) {
  camera.validate();
  validate_mask(mask);
  const Pose to_cam = camera.world_to_camera(robot_pose);
  const Eigen::Matrix3d r = to_cam.rotation_matrix();

  double umin = mask[0].x(), umax = umin, vmin = mask[0].y(), vmax = vmin;
  for (const Vec2& v : mask) {
    umin = std::min(umin, v.x());
    umax = std::max(umax, v.x());
    vmin = std::min(vmin, v.y());
    vmax = std::max(vmax, v.y());
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < world_cloud.size(); ++i) {
    const Vec3 pc = r * world_cloud.points[i] + to_cam.translation;
    const auto px = camera.project(pc);
    if (!px) continue;
    if (px->x() <= umin || px->x() >= umax || px->y() <= vmin || px->y() >= vmax) continue;
    if (point_in_polygon(mask, *px)) keep.push_back(i);
  }
  return keep;
}

PointCloud extract_masked_points(const PointCloud& world_cloud, const CameraModel& camera,
                                 const Pose& robot_pose, const Polygon2& mask) {
  PointCloud out;
  out.frame = world_cloud.frame;
  for (std::size_t i : masked_point_indices(world_cloud, camera, robot_pose, mask)) {
    out.points.push_back(world_cloud.points[i]);
  }
  return out;
}

}  // namespace usdrecon
