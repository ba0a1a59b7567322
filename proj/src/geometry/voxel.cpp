// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/geometry/voxel.hpp"

#include "usdrecon/error.hpp"

namespace usdrecon {

std::size_t VoxelKeyHash::operator()(const VoxelKey& k) const noexcept {
  // Teschner et al. spatial hash primes.
  const auto h = static_cast<std::uint64_t>(k[0]) * 73856093ULL ^
                 static_cast<std::uint64_t>(k[1]) * 19349663ULL ^
                 static_cast<std::uint64_t>(k[2]) * 83492791ULL;
  return static_cast<std::size_t>(h);
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  VoxelAccumulator acc(voxel_size);
  acc.insert(cloud);
  PointCloud out = acc.cloud();
  out.frame = cloud.frame;
  return out;
}

std::size_t VoxelAccumulator::insert(const PointCloud& cloud) {
  if (!(voxel_size_ > 0.0)) throw Error(ErrorCode::kInvalidInput, "voxel size must be positive");
  std::size_t added = 0;
  for (const Vec3& p : cloud.points) {
    auto [it, inserted] = occupied_.emplace(voxel_key(p, voxel_size_),
                                            static_cast<std::uint32_t>(cloud_.points.size()));
    if (inserted) {
      cloud_.points.push_back(p);
      ++added;
    }
  }
  return added;
}

}  // namespace usdrecon
