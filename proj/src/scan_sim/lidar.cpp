// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/scan_sim/lidar.hpp"

#include <cmath>
#include <numbers>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {
std::atomic<std::uint64_t> g_rays_cast{0};
}

void LidarConfig::validate() const {
  if (azimuth_steps < 1 || elevation_steps < 1) {
    throw Error(ErrorCode::kInvalidInput, "LiDAR step counts must be >= 1");
  }
  if (!(max_range > 0.0) || !std::isfinite(max_range)) {
    throw Error(ErrorCode::kInvalidInput, "LiDAR max range must be positive");
  }
  if (!(elevation_min <= elevation_max)) {
    throw Error(ErrorCode::kInvalidInput, "LiDAR elevation range is inverted");
  }
}

std::vector<Vec3> LidarConfig::directions() const {
  validate();
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(azimuth_steps) * elevation_steps);
  for (int e = 0; e < elevation_steps; ++e) {
    const double el = elevation_steps == 1
                          ? 0.5 * (elevation_min + elevation_max)
                          : elevation_min + (elevation_max - elevation_min) * e / (elevation_steps - 1);
    const double ce = std::cos(el), se = std::sin(el);
    for (int a = 0; a < azimuth_steps; ++a) {
      const double az = 2.0 * std::numbers::pi * a / azimuth_steps;
      dirs.emplace_back(ce * std::cos(az), ce * std::sin(az), se);
    }
  }
  return dirs;
}

std::vector<Vec3> asset_viewpoints(const TriangleMesh& mesh, int n_viewpoints,
                                   const ViewpointLayout& layout) {
  if (n_viewpoints < 1) throw Error(ErrorCode::kInvalidInput, "need at least one viewpoint");
  const Aabb box = mesh.bounds();
  const Vec3 center = box.center();
  const double radius = layout.radius_factor * box.extent().norm();
  std::vector<Vec3> origins;
  for (int k = 0; k < n_viewpoints; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n_viewpoints;
    origins.emplace_back(center.x() + radius * std::cos(angle),
                         center.y() + radius * std::sin(angle), layout.height);
  }
  return origins;
}

PointCloud simulate_asset_cloud(const TriangleMesh& mesh, const LidarConfig& config,
                                int n_viewpoints, const ViewpointLayout& layout) {
  config.validate();
  PointCloud cloud;
  cloud.frame = "asset";
  if (mesh.empty()) return cloud;
  const MeshBvh bvh(mesh);
  const std::vector<Vec3> dirs = config.directions();
  for (const Vec3& origin : asset_viewpoints(mesh, n_viewpoints, layout)) {
    for (const Vec3& d : dirs) {
      if (auto hit = bvh.cast(origin, d, config.max_range)) cloud.points.push_back(hit->point);
    }
    g_rays_cast.fetch_add(dirs.size(), std::memory_order_relaxed);
  }
  return cloud;
}

std::uint64_t simulated_ray_count() { return g_rays_cast.load(std::memory_order_relaxed); }

}  // namespace usdrecon
