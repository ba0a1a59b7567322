// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "usdrecon/geometry/pose.hpp"

namespace usdrecon {

struct PointCloud {
  std::vector<Vec3> points;
  std::string frame = "world";

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose);
void transform_in_place(PointCloud& cloud, const Pose& pose);

Vec3 centroid(const PointCloud& cloud);

/// Throws kInvalidInput on any non-finite coordinate.
void validate_cloud(const PointCloud& cloud);

/// Axis-aligned box, min <= max component-wise.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double volume() const;
  double footprint_area() const;
  bool contains(const Vec3& p, double tol = 0.0) const;
  Aabb translated(const Vec3& d) const { return {min + d, max + d}; }
  Aabb inflated(double margin) const;
  void expand(const Vec3& p);
};

Aabb aabb_of(const PointCloud& cloud);
Aabb aabb_of(const std::vector<Vec3>& points);
/// Box of the eight corners of `box` after transformation.
Aabb transform_aabb(const Aabb& box, const Pose& pose);

/// Overlap volume of two boxes (0 if disjoint).
double overlap_volume(const Aabb& a, const Aabb& b);
/// Overlap area of the xy projections.
double overlap_area_xy(const Aabb& a, const Aabb& b);

}  // namespace usdrecon
