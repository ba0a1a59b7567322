// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usdrecon/evaluation/metrics.hpp"
#include "usdrecon/pipeline/asset_db.hpp"
#include "usdrecon/pipeline/sensor_log.hpp"

namespace usdrecon {

struct GroundTruthPlacement {
  std::string asset_id;
  Pose pose;
};

struct GroundTruthScene {
  std::vector<GroundTruthPlacement> placements;
  Aabb bounds;
  /// Extra static geometry (walls) that occludes but is never detected.
  TriangleMesh clutter;
};

struct LogOptions {
  CameraModel camera = [] {
    CameraModel c;
    c.extrinsic = optical_mount(Vec3(0.1, 0.0, 0.6));
    return c;
  }();
  double lidar_height = 0.5;     ///< sensor origin above the body, meters
  double ground_z = 0.0;
  double frame_period = 0.1;     ///< seconds between frames
  int pixel_step = 4;            ///< camera visibility rays every n pixels
  std::size_t min_visible = 20;  ///< camera-ray hits needed for a detection
  double max_detection_range = 8.0;
  /// Skip assets whose box is cut by the image border.
  bool require_full_view = true;
  double mask_dilation = 3.0;    ///< pixels
  double embedding_noise = 0.0;  ///< Gaussian sigma added per component
  std::uint64_t seed = 0;
};

/// Ray casts the scene (placed meshes, clutter and a ground plane covering
/// the bounds) from every trajectory pose. Each frame gets the world-frame
/// LiDAR cloud and one detection per asset the camera sees: label = the
/// asset's first label, mask = dilated hull of its visible pixels, embedding
/// = the stored view closest to the viewing bearing plus optional noise.
/// Throws kMissingAsset for unknown ids.
SensorLog generate_scene_log(const GroundTruthScene& scene, const std::vector<Pose>& trajectory,
                             const LidarConfig& lidar, const AssetDatabase& db,
                             const LogOptions& options = {});

/// World boxes of the placed meshes, labeled with each asset's first label.
std::vector<LabeledBox> ground_truth_boxes(const GroundTruthScene& scene, const AssetDatabase& db);

/// Poses on a circle around `center`, all facing it, the first on +x.
std::vector<Pose> orbit_trajectory(const Vec3& center, double radius, int n_frames);

/// Orbit around the placed objects' xy box at half its diagonal plus `margin`.
std::vector<Pose> scene_orbit(const GroundTruthScene& scene, const AssetDatabase& db, int n_frames,
                              double margin = 1.5);

/// `count` distinct assets from the database laid out on a grid with seeded
/// yaws, spaced so no two boxes come closer than `gap`.
GroundTruthScene demo_scene(const AssetDatabase& db, std::size_t count, std::uint64_t seed,
                            double gap = 1.0);

void write_ground_truth(const std::filesystem::path& path, const GroundTruthScene& scene);
GroundTruthScene read_ground_truth(const std::filesystem::path& path);

}  // namespace usdrecon
