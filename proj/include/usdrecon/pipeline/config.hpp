// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>

#include "usdrecon/prompting/prompting.hpp"
#include "usdrecon/reconciliation/scene.hpp"
#include "usdrecon/registration/registration.hpp"

namespace usdrecon {

struct PipelineConfig {
  double nms_radius = 0.5;      ///< meters
  double voxel_size = 0.01;     ///< scoring grid, meters
  double world_voxel = 0.02;    ///< accumulated-cloud downsampling, meters
  int reconcile_every = 10;     ///< frames; 0 reconciles only at the end
  int snapshot_every = 10;      ///< frames; 0 writes only the final snapshot
  std::size_t retrieval_k = 1;
  double retrieval_threshold = 0.2;  ///< minimum cosine similarity
  CoarseOptions coarse;
  int coarse_candidates = 4;    ///< yaw hypotheses refined by ICP
  IcpOptions icp;
  double max_registration_rms = 0.05;  ///< fits above this are rejected, meters
  /// Re-run ICP for each cluster winner against the accumulated world points
  /// around it, so poses fitted to one partial view use every view.
  bool refine_survivors = true;
  double refine_margin = 0.05;     ///< meters added around the winner's box
  double refine_rejection = 0.05;  ///< ICP rejection distance for the refit
  ScoreWeights weights;
  /// Slack for the hull tests while scoring. Scanned surfaces lie on the hull
  /// boundary, so an exact test discards about half of them.
  double score_hull_tolerance = 0.02;
  double ground_z = 0.0;
  double ground_clearance = 0.03;  ///< masked points below ground_z + this are dropped
  double cluster_radius = 0.1;     ///< Euclidean clustering link distance
  std::size_t min_cluster_points = 80;
  std::size_t max_segments = 3;       ///< clusters tried per detection
  double min_mask_agreement = 0.8;    ///< share of the fitted asset projecting into the mask
  int settle_passes = 10;
  std::size_t workers = 1;      ///< detection-level threads; 0 = hardware concurrency
  std::optional<std::filesystem::path> label_map;  ///< JSON alias table
  EndpointConfig endpoint;

  /// Throws kInvalidInput naming the first offending field.
  void validate() const;
};

/// Reads a config file. Unknown keys and wrongly typed values are errors
/// (ParseError positioned at the value). Relative label_map paths resolve
/// against the file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(std::string_view text);

}  // namespace usdrecon
