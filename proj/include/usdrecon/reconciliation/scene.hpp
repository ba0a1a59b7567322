// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "usdrecon/geometry/kd_tree.hpp"

namespace usdrecon {

inline constexpr double kNoSupportScore = -std::numeric_limits<double>::infinity();

/// Fill statistics of the scene points inside a placement's convex hull.
/// `distribution` is 1 - sigma/mu over the non-empty voxel counts and
/// `density` the fraction of hull voxels that hold at least one point.
struct ScoreBreakdown {
  double distribution = kNoSupportScore;
  double density = 0.0;
  std::size_t occupied_voxels = 0;  ///< |C|
  std::size_t total_voxels = 0;     ///< voxels whose center lies inside the hull
  double mean = 0.0;                ///< mu over occupied voxel counts
  double stddev = 0.0;              ///< population sigma over the same counts
  bool has_support() const { return occupied_voxels > 0; }
};

struct ScoreWeights {
  double distribution = 0.5;
  double density = 0.5;
};

/// Weighted sum of clamp(distribution, 0, 1) and density; kNoSupportScore
/// when the hull holds no scene point.
double combined_score(const ScoreBreakdown& s, const ScoreWeights& w = {});

struct PlacedAsset {
  std::uint64_t instance_id = 0;
  std::string asset_id;
  std::string label;
  Pose pose;
  PointCloud registered_cloud;   ///< asset sim cloud in the world frame
  PointCloud supporting_points;  ///< masked scene points it was registered to
  ScoreBreakdown scores;
  double combined = kNoSupportScore;
  std::size_t created_at = 0;    ///< frame index
  /// Mesh bounds in the asset frame. Settling and evaluation prefer these to
  /// the bounds of the (view-biased) registered cloud.
  std::optional<Aabb> local_bounds;
};

/// World-frame box of a placement: transformed local bounds when known,
/// otherwise the registered cloud's box. Throws kEmptyCloud if neither exists.
Aabb world_bounds(const PlacedAsset& p);

/// Rigidly shifts a placement (pose and registered cloud).
void translate_placement(PlacedAsset& p, const Vec3& delta);

struct SceneState {
  std::vector<PlacedAsset> placed;
  std::size_t frame = 0;
  std::optional<Aabb> bounds;
  /// Set when settle_scene hit its pass cap before reaching a fixed point.
  bool settle_warning = false;
  std::shared_ptr<const PointCloud> world_cloud;
};

/// Throws kInvalidInput on repeated instance ids or invalid poses.
void validate_scene(const SceneState& scene);

struct ScoreOptions {
  double voxel_size = 0.01;
  /// Points within this distance outside a hull face still count as inside.
  double hull_tolerance = 1e-9;
};

/// Voxelizes the convex hull of the registered cloud on a grid anchored at
/// the hull's lower box corner and counts scene points per voxel. Voxels whose
/// center falls outside the hull take part in neither |C| nor the total.
/// Flat or collinear clouds are thickened before hulling.
ScoreBreakdown score_placement(const PlacedAsset& placement, const NeighborIndex& scene_index,
                               const ScoreOptions& options = {});
ScoreBreakdown score_placement(const PlacedAsset& placement, const PointCloud& scene_cloud,
                               const ScoreOptions& options = {});

/// Greedy Euclidean NMS on pose translations. Placements are visited by
/// combined score (descending, then instance id); each unassigned one seeds a
/// cluster and absorbs every unassigned placement within `radius`. Indices
/// refer to `placed`; the seed comes first in each cluster.
std::vector<std::vector<std::size_t>> cluster_nms(const std::vector<PlacedAsset>& placed,
                                                  double radius);

/// Keeps, per cluster, the placement with the highest combined score (lower
/// instance id on ties). Survivors stay in instance-id order.
SceneState select_representatives(const SceneState& scene,
                                   const std::vector<std::vector<std::size_t>>& clusters);

struct SettleOptions {
  /// A lower asset supports another when their xy overlap exceeds this share
  /// of the smaller footprint.
  double support_overlap = 0.25;
  /// Overlaps below this (meters) count as contact.
  double contact_tolerance = 1e-9;
  /// Footprints within this share of the larger one count as equal; the pair
  /// is then split by combined score.
  double footprint_tie = 0.1;
};

/// Quasi-static relaxation on world AABBs: drop every asset onto the ground or
/// its highest support, then push interpenetrating pairs apart horizontally
/// (the smaller footprint moves; on a near tie, the lower combined score).
/// Repeats until nothing moves or `max_passes` is reached, in which case
/// settle_warning is set. Orientations are kept.
SceneState settle_scene(const SceneState& scene, double ground_z, int max_passes = 10,
                        const SettleOptions& options = {});

}  // namespace usdrecon
