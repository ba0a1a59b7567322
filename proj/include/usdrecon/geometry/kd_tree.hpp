// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

struct Neighbor {
  std::size_t index;  ///< index into the cloud the tree was built from
  double distance;    ///< Euclidean, meters
};

/// Immutable k-d tree over a point cloud. Leaves hold their points in
/// structure-of-arrays form so leaf scans go through the SIMD kernels. Ties are
/// broken towards the smaller original index, matching a linear scan.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  explicit NeighborIndex(const PointCloud& cloud, std::size_t leaf_size = 16);
  explicit NeighborIndex(const std::vector<Vec3>& points, std::size_t leaf_size = 16);

  std::size_t size() const { return xs_.size(); }
  bool empty() const { return xs_.empty(); }

  /// Throws kEmptyIndex when the tree holds no points.
  Neighbor nearest(const Vec3& query) const;
  /// Nearest neighbor closer than `max_distance`, if any.
  bool nearest_within(const Vec3& query, double max_distance, Neighbor& out) const;
  /// Original indices of all points within `radius` of `query`, ascending.
  std::vector<std::size_t> radius_search(const Vec3& query, double radius) const;
  /// Original indices of all points inside the closed box, ascending.
  std::vector<std::size_t> box_search(const Aabb& box) const;

  Vec3 point(std::size_t original_index) const;

 private:
  struct Node {
    // Leaves: [begin, end) into the SoA arrays, axis < 0.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t axis = -1;
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    Aabb bounds;
  };

  void build(const std::vector<Vec3>& points, std::size_t leaf_size);
  std::int32_t build_node(std::vector<std::uint32_t>& order, std::uint32_t begin,
                          std::uint32_t end, const std::vector<Vec3>& points,
                          std::size_t leaf_size);
  void search_nearest(std::int32_t node, const Vec3& q, std::size_t& best_index,
                      double& best_sq) const;

  std::vector<Node> nodes_;
  std::vector<double> xs_, ys_, zs_;
  std::vector<std::uint32_t> original_;  // SoA slot -> original index
  std::vector<std::uint32_t> slot_of_;   // original index -> SoA slot
};

/// Linear-scan reference used as the test oracle (SIMD-dispatched).
Neighbor brute_force_nearest(const std::vector<Vec3>& points, const Vec3& query);

}  // namespace usdrecon
