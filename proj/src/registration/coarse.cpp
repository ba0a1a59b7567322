// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "usdrecon/geometry/kd_tree.hpp"
#include "usdrecon/registration/registration.hpp"

namespace usdrecon {

namespace {

std::vector<Vec3> stride_subsample(const std::vector<Vec3>& pts, std::size_t max_points) {
  if (max_points == 0 || pts.size() <= max_points) return pts;
  std::vector<Vec3> out;
  out.reserve(max_points);
  for (std::size_t k = 0; k < max_points; ++k) out.push_back(pts[k * pts.size() / max_points]);
  return out;
}

double min_z(const std::vector<Vec3>& pts) {
  double z = pts.front().z();
  for (const Vec3& p : pts) z = std::min(z, p.z());
  return z;
}

}  // namespace

std::vector<RegistrationResult> coarse_candidates(const PointCloud& source,
                                                  const PointCloud& target,
                                                  const CoarseOptions& options) {
  if (source.size() < options.min_points || target.size() < options.min_points ||
      source.empty() || target.empty()) {
    throw Error(ErrorCode::kInsufficientData, "coarse registration needs at least " +
                                                  std::to_string(options.min_points) +
                                                  " points in each cloud");
  }
  if (options.yaw_steps < 1) throw Error(ErrorCode::kInvalidInput, "yaw_steps must be >= 1");
  validate_cloud(source);
  validate_cloud(target);

  const Vec3 cs = centroid(source);
  const Vec3 ct = centroid(target);
  const double dz = min_z(target.points) - min_z(source.points);

  const std::vector<Vec3> src = stride_subsample(source.points, options.max_points);
  const std::vector<Vec3> tgt = stride_subsample(target.points, options.max_points);
  const NeighborIndex src_index(src);
  const NeighborIndex tgt_index(tgt);
  const double inlier_sq = options.inlier_distance * options.inlier_distance;

  std::vector<RegistrationResult> results;
  results.reserve(options.yaw_steps);
  for (int k = 0; k < options.yaw_steps; ++k) {
    const double yaw = 2.0 * std::numbers::pi * k / options.yaw_steps;
    Pose pose = Pose::from_yaw(yaw);
    const Vec3 rotated_cs = pose.rotation * cs;
    pose.translation = Vec3(ct.x() - rotated_cs.x(), ct.y() - rotated_cs.y(), dz);
    const Pose inv = inverse(pose);

    double sum_sq = 0.0;
    std::size_t inliers = 0;
    for (const Vec3& p : src) {
      const double d = tgt_index.nearest(pose.apply(p)).distance;
      sum_sq += d * d;
      inliers += d * d <= inlier_sq;
    }
    for (const Vec3& q : tgt) {
      const double d = src_index.nearest(inv.apply(q)).distance;
      sum_sq += d * d;
      inliers += d * d <= inlier_sq;
    }
    const double n = static_cast<double>(src.size() + tgt.size());
    RegistrationResult r;
    r.pose = pose;
    r.rms = std::sqrt(sum_sq / n);
    r.inlier_fraction = static_cast<double>(inliers) / n;
    r.iterations = options.yaw_steps;
    results.push_back(r);
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const RegistrationResult& a, const RegistrationResult& b) { return a.rms < b.rms; });
  return results;
}

RegistrationResult coarse_register(const PointCloud& source, const PointCloud& target,
                                   const CoarseOptions& options) {
  return coarse_candidates(source, target, options).front();
}

}  // namespace usdrecon
