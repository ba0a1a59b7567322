// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

using Vec2 = Eigen::Vector2d;
using Polygon2 = std::vector<Vec2>;

/// Camera mount with optical axes (x right, y down, z forward) on a body whose
/// x axis points forward and z up.
Pose optical_mount(const Vec3& offset = Vec3::Zero());

/// Pinhole camera. `extrinsic` is the camera pose in the robot body frame.
struct CameraModel {
  double fx = 320.0;
  double fy = 320.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  Pose extrinsic = optical_mount();

  void validate() const;
  /// Transform taking world points into the camera frame.
  Pose world_to_camera(const Pose& robot_pose) const;
  /// Pixel of a camera-frame point; nullopt when z <= 0.
  std::optional<Vec2> project(const Vec3& p_cam) const;
  bool in_image(const Vec2& px) const;
};

/// One 2D detection: label, confidence, mask polygon in pixels and an image
/// embedding.
struct Detection {
  std::size_t frame_id = 0;
  std::string label;
  double confidence = 1.0;
  Polygon2 mask;
  std::vector<double> embedding;
};

/// Throws kInvalidMask for polygons with fewer than three vertices, zero
/// area or non-finite coordinates.
void validate_mask(const Polygon2& mask);
/// Mask validation plus the image-bounds and confidence checks.
void validate_detection(const Detection& det, const CameraModel& camera);

/// Strict interior test: points on an edge are outside.
bool point_in_polygon(const Polygon2& polygon, const Vec2& p);

double polygon_area(const Polygon2& polygon);

/// Counter-clockwise hull (Andrew's monotone chain), collinear points dropped.
Polygon2 convex_hull_2d(std::vector<Vec2> points);

/// Indices of world points in front of the camera whose projection lies
/// strictly inside `mask`, ascending.
std::vector<std::size_t> masked_point_indices(const PointCloud& world_cloud,
                                              const CameraModel& camera,
                                              const Pose& robot_pose, const Polygon2& mask);

PointCloud extract_masked_points(const PointCloud& world_cloud, const CameraModel& camera,
                                 const Pose& robot_pose, const Polygon2& mask);

}  // namespace usdrecon
