// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "usdrecon/error.hpp"
#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

struct RegistrationResult {
  Pose pose;                   ///< maps source (asset frame) into the target frame
  double rms = 0.0;            ///< meters
  double inlier_fraction = 0.0;
  int iterations = 0;
  double scale = 1.0;          ///< uniform scale; 1 unless scale search ran
};

struct CoarseOptions {
  int yaw_steps = 64;
  std::size_t min_points = 10;
  /// Both clouds are stride-subsampled to at most this many points for scoring.
  std::size_t max_points = 2000;
  /// Pair distance counted as an inlier when reporting inlier_fraction.
  double inlier_distance = 0.25;
};

/// Centroid alignment in xy, floor alignment in z (source min-z onto target
/// min-z) and an exhaustive yaw grid scored by symmetric nearest-neighbor RMS.
/// Throws kInsufficientData when either cloud has fewer than min_points.
RegistrationResult coarse_register(const PointCloud& source, const PointCloud& target,
                                   const CoarseOptions& options = {});

/// Every grid yaw, best first (ties keep grid order).
std::vector<RegistrationResult> coarse_candidates(const PointCloud& source,
                                                  const PointCloud& target,
                                                  const CoarseOptions& options = {});

struct IcpOptions {
  int max_iterations = 50;
  double tolerance = 1e-5;           ///< stop when the RMS improves by less, meters
  double rejection_distance = 0.25;  ///< correspondences farther apart are ignored
  bool scale_search = false;
  /// Restrict the update to yaw plus translation (objects resting on a floor).
  bool yaw_only = false;
};

struct IcpResult : RegistrationResult {
  /// Truncated RMS before the first update and after every iteration.
  std::vector<double> rms_history;
};

/// Raised when an ICP iteration has fewer than three correspondences.
class DivergenceError : public Error {
 public:
  DivergenceError(const Pose& last_pose, const std::string& message)
      : Error(ErrorCode::kDivergence, message), last_pose_(last_pose) {}
  const Pose& last_pose() const { return last_pose_; }

 private:
  Pose last_pose_;
};

/// Point-to-point ICP. Every target point is paired with its nearest source
/// point under the current pose; pairs beyond the rejection distance are
/// dropped. The reported RMS is the truncated error
/// sqrt(mean(min(d^2, rejection^2))) over all target points, which can only
/// decrease from one iteration to the next.
IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const Pose& init,
                     const IcpOptions& options = {});

/// Closed-form least-squares fit of target ~ s * R * source + t over paired
/// points (cross-covariance SVD with reflection guard).
struct SimilarityFit {
  Pose pose;
  double scale = 1.0;
};
SimilarityFit fit_rigid(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                        bool with_scale = false);
SimilarityFit fit_yaw_translation(const std::vector<Vec3>& source,
                                  const std::vector<Vec3>& target);

}  // namespace usdrecon
