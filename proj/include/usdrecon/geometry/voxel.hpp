// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

using VoxelKey = std::array<std::int64_t, 3>;

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept;
};

inline VoxelKey voxel_key(const Vec3& p, double voxel_size, const Vec3& origin = Vec3::Zero()) {
  const Vec3 r = (p - origin) / voxel_size;
  return {static_cast<std::int64_t>(std::floor(r.x())),
          static_cast<std::int64_t>(std::floor(r.y())),
          static_cast<std::int64_t>(std::floor(r.z()))};
}

/// Keeps the first point landing in each voxel, in input order.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

/// Incremental variant: one point per voxel across repeated inserts, so the
/// cloud only grows.
class VoxelAccumulator {
 public:
  explicit VoxelAccumulator(double voxel_size) : voxel_size_(voxel_size) {}

  /// Returns the number of points actually added.
  std::size_t insert(const PointCloud& cloud);
  const PointCloud& cloud() const { return cloud_; }
  double voxel_size() const { return voxel_size_; }

 private:
  double voxel_size_;
  PointCloud cloud_;
  std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> occupied_;
};

}  // namespace usdrecon
