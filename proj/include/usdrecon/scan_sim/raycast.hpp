// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "usdrecon/scan_sim/mesh.hpp"

namespace usdrecon {

struct RayHit {
  Vec3 point;
  double distance;
  std::uint32_t triangle;
};

inline constexpr double kMinHitDistance = 1e-9;

/// Nearest intersection (either face side) with t > kMinHitDistance and
/// t <= max_range, by testing every triangle. Non-unit directions are
/// normalized; a zero direction throws kInvalidInput.
std::optional<RayHit> raycast_triangle(const TriangleMesh& mesh, const Vec3& origin,
                                       const Vec3& direction,
                                       double max_range = std::numeric_limits<double>::infinity());

/// Bounding volume hierarchy over a mesh; same hit semantics as
/// raycast_triangle (including the lowest-triangle tie-break).
class MeshBvh {
 public:
  MeshBvh() = default;
  explicit MeshBvh(TriangleMesh mesh);

  const TriangleMesh& mesh() const { return mesh_; }
  std::optional<RayHit> cast(const Vec3& origin, const Vec3& unit_direction,
                             double max_range) const;

 private:
  struct Node {
    Aabb bounds;
    std::uint32_t begin = 0, end = 0;  // into order_ for leaves
    std::int32_t left = -1, right = -1;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  TriangleMesh mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Aabb> tri_bounds_;
  std::vector<Vec3> tri_centers_;
};

}  // namespace usdrecon
