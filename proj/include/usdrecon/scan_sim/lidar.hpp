// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "usdrecon/scan_sim/raycast.hpp"

namespace usdrecon {

/// Spinning LiDAR: azimuth covers the full circle, elevation is sampled
/// uniformly (inclusive) over [elevation_min, elevation_max].
struct LidarConfig {
  int azimuth_steps = 512;
  int elevation_steps = 64;
  double elevation_min = -30.0 * 3.14159265358979323846 / 180.0;
  double elevation_max = 30.0 * 3.14159265358979323846 / 180.0;
  double max_range = 20.0;

  void validate() const;
  /// Unit ray directions in the sensor frame (x forward, z up), elevation-major.
  std::vector<Vec3> directions() const;
};

struct ViewpointLayout {
  double radius_factor = 1.5;  ///< circle radius as a multiple of the AABB diagonal
  double height = 0.4;         ///< sensor z in the asset frame, meters
};

/// Sensor origins on a circle around the mesh AABB center; the first one
/// sits on the +x side.
std::vector<Vec3> asset_viewpoints(const TriangleMesh& mesh, int n_viewpoints,
                                   const ViewpointLayout& layout = {});

/// Union of the hits seen from `n_viewpoints` surrounding sensors, in the
/// mesh's own frame. An empty mesh yields an empty cloud.
PointCloud simulate_asset_cloud(const TriangleMesh& mesh, const LidarConfig& config,
                                int n_viewpoints = 4, const ViewpointLayout& layout = {});

/// Total rays cast by simulate_asset_cloud in this process (instrumentation).
std::uint64_t simulated_ray_count();

}  // namespace usdrecon
