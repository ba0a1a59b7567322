// SPDX-License-Identifier: Apache-2.0
#include <Eigen/SVD>
#include <cmath>

#include "usdrecon/geometry/kd_tree.hpp"
#include "usdrecon/registration/registration.hpp"

namespace usdrecon {

SimilarityFit fit_rigid(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                        bool with_scale) {
  const std::size_t n = source.size();
  if (n < 3 || target.size() != n) {
    throw Error(ErrorCode::kInsufficientData, "rigid fit needs at least three pairs");
  }
  Vec3 mu_s = Vec3::Zero(), mu_t = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= static_cast<double>(n);
  mu_t /= static_cast<double>(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 ds = source[i] - mu_s;
    cov += (target[i] - mu_t) * ds.transpose();
    var_s += ds.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_s /= static_cast<double>(n);

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixU() * s * svd.matrixV().transpose();

  SimilarityFit fit;
  if (with_scale && var_s > 0.0) {
    fit.scale = (svd.singularValues().asDiagonal() * s).trace() / var_s;
  }
  fit.pose.rotation = Eigen::Quaterniond(r).normalized();
  fit.pose.translation = mu_t - fit.scale * (r * mu_s);
  return fit;
}

SimilarityFit fit_yaw_translation(const std::vector<Vec3>& source,
                                  const std::vector<Vec3>& target) {
  const std::size_t n = source.size();
  if (n < 3 || target.size() != n) {
    throw Error(ErrorCode::kInsufficientData, "yaw fit needs at least three pairs");
  }
  Vec3 mu_s = Vec3::Zero(), mu_t = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= static_cast<double>(n);
  mu_t /= static_cast<double>(n);
  double sin_sum = 0.0, cos_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 a = source[i] - mu_s;
    const Vec3 b = target[i] - mu_t;
    cos_sum += a.x() * b.x() + a.y() * b.y();
    sin_sum += a.x() * b.y() - a.y() * b.x();
  }
  SimilarityFit fit;
  fit.pose = Pose::from_yaw(std::atan2(sin_sum, cos_sum));
  fit.pose.translation = mu_t - fit.pose.rotation * mu_s;
  return fit;
}

namespace {

struct Correspondences {
  std::vector<Vec3> source;  // asset-frame points
  std::vector<Vec3> target;
  double truncated_rms = 0.0;
};

Correspondences correspond(const NeighborIndex& src_index, const PointCloud& target,
                           const Pose& pose, double scale, double rejection) {
  Correspondences c;
  const Pose inv = inverse(pose);
  const double rejection_sq = rejection * rejection;
  double sum = 0.0;
  for (const Vec3& q : target.points) {
    const Vec3 local = inv.apply(q) / scale;
    Neighbor nb;
    // Distances in the source frame shrink by the scale factor.
    if (src_index.nearest_within(local, rejection / scale, nb)) {
      const double d = nb.distance * scale;
      const double d_sq = d * d;
      if (d_sq <= rejection_sq) {
        sum += d_sq;
        c.source.push_back(src_index.point(nb.index));
        c.target.push_back(q);
        continue;
      }
    }
    sum += rejection_sq;
  }
  c.truncated_rms = std::sqrt(sum / static_cast<double>(target.size()));
  return c;
}

}  // namespace

IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const Pose& init,
                     const IcpOptions& options) {
  validate_pose(init, 1e-6);
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "ICP needs non-empty source and target clouds");
  }
  if (!(options.rejection_distance > 0.0) || options.max_iterations < 0) {
    throw Error(ErrorCode::kInvalidInput, "invalid ICP options");
  }
  const NeighborIndex src_index(source);

  IcpResult result;
  result.pose = init;
  result.scale = 1.0;
  Correspondences c = correspond(src_index, target, result.pose, result.scale,
                                 options.rejection_distance);
  result.rms_history.push_back(c.truncated_rms);
  result.rms = c.truncated_rms;

  for (int it = 1; it <= options.max_iterations; ++it) {
    if (c.source.size() < 3) {
      throw DivergenceError(result.pose, "ICP lost correspondences (" +
                                             std::to_string(c.source.size()) + " left)");
    }
    SimilarityFit fit = options.yaw_only ? fit_yaw_translation(c.source, c.target)
                                         : fit_rigid(c.source, c.target, options.scale_search);
    Correspondences next = correspond(src_index, target, fit.pose, fit.scale,
                                      options.rejection_distance);
    result.iterations = it;
    const double improvement = c.truncated_rms - next.truncated_rms;
    result.pose = fit.pose;
    result.scale = fit.scale;
    result.rms = next.truncated_rms;
    result.rms_history.push_back(next.truncated_rms);
    c = std::move(next);
    if (improvement < options.tolerance) break;
  }
  result.inlier_fraction =
      static_cast<double>(c.source.size()) / static_cast<double>(target.size());
  return result;
}

}  // namespace usdrecon
