// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "usdrecon/geometry/pose.hpp"
#include "usdrecon/pipeline/asset_db.hpp"
#include "usdrecon/pipeline/config.hpp"
#include "usdrecon/pipeline/sensor_log.hpp"
#include "usdrecon/reconciliation/scene.hpp"
#include "usdrecon/registration/camera.hpp"

namespace usdrecon {

/// What happened to one detection.
struct DetectionOutcome {
  std::size_t frame = 0;
  std::size_t detection = 0;
  std::string label;
  std::string asset_id;   ///< empty when retrieval found nothing
  bool placed = false;
  std::string reason;     ///< why it was skipped
  double rms = 0.0;       ///< registration fit, meters
  double inlier_fraction = 0.0;
  std::optional<Pose> pose;  ///< fitted asset pose, when registration ran
  std::size_t target_points = 0;
};

struct PipelineResult {
  SceneState scene;
  std::vector<std::filesystem::path> snapshots;
  std::vector<DetectionOutcome> outcomes;
  std::vector<std::size_t> world_cloud_sizes;  ///< after each frame
  std::size_t placements_inserted = 0;
  std::size_t reconciliations = 0;
  double seconds = 0.0;
};

/// Connected components of the graph linking points closer than `radius`.
/// Components are ordered by their smallest point index; members ascend.
std::vector<std::vector<std::size_t>> euclidean_clusters(const PointCloud& cloud, double radius);

/// Splits a masked cut of the world cloud into object candidates: drops
/// ground returns, clusters the rest and keeps clusters of at least
/// min_cluster_points, nearest to `viewer` (by median distance) first.
std::vector<PointCloud> segment_candidates(const PointCloud& masked, const Vec3& viewer,
                                           const PipelineConfig& config);

/// Nearest candidate, or an empty cloud when none qualifies.
PointCloud segment_target(const PointCloud& masked, const Vec3& viewer, const PipelineConfig& config);

/// Share of the points whose projection falls inside the mask.
double mask_agreement(const PointCloud& cloud, const CameraModel& camera, const Pose& robot_pose,
                      const Polygon2& mask);

/// Registers an asset cloud to a target: coarse yaw hypotheses, each refined
/// by ICP; the lowest final RMS wins (earlier hypothesis on ties).
IcpResult register_asset(const PointCloud& asset_cloud, const PointCloud& target,
                         const PipelineConfig& config);

/// One reconciliation pass: rescore against `world`, drop unsupported
/// placements, cluster NMS, keep the best of each cluster, optionally refit
/// the winners to the accumulated cloud (needs `db`), settle, rescore and
/// drop anything that lost its support.
void reconcile_scene(SceneState& scene, const PointCloud& world, const PipelineConfig& config,
                     const AssetDatabase* db = nullptr);

/// Streams the log. Snapshots (scene_<frame>.usda, plus scene_final.usda)
/// and report.json go to `out_dir` when given.
PipelineResult run_pipeline(const SensorLog& log, const AssetDatabase& db,
                            const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);
PipelineResult run_pipeline(const std::filesystem::path& log_dir, const AssetDatabase& db,
                            const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string pipeline_report_json(const PipelineResult& result);

}  // namespace usdrecon
