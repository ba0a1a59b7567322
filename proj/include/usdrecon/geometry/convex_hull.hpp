// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

struct HullPlane {
  Vec3 normal;    ///< unit, outward
  double offset;  ///< normal . p <= offset for interior points
};

/// Closed convex polytope with outward-oriented triangular faces.
struct ConvexHull3 {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<HullPlane> planes;  ///< one per face
  /// True when the input was flat or collinear and was thickened first.
  bool inflated = false;

  double volume() const;
  /// Max over faces of normal . p - offset; <= 0 inside.
  double signed_distance(const Vec3& p) const;
  bool contains(const Vec3& p, double tol = 1e-9) const { return signed_distance(p) <= tol; }
  Aabb bounds() const { return aabb_of(vertices); }
};

struct HullOptions {
  /// Thicken coplanar/collinear inputs by +/- `inflation` along the deficient
  /// axes instead of throwing kDegenerateGeometry.
  bool inflate_degenerate = false;
  double inflation = 0.005;
};

/// Quickhull. Throws kDegenerateGeometry for fewer than four affinely
/// independent points unless `options.inflate_degenerate` is set.
ConvexHull3 convex_hull_3d(const PointCloud& cloud, const HullOptions& options = {});
ConvexHull3 convex_hull_3d(const std::vector<Vec3>& points, const HullOptions& options = {});

}  // namespace usdrecon
