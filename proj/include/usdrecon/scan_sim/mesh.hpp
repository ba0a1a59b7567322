// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  Aabb bounds() const { return aabb_of(vertices); }
  /// Throws kInvalidInput on out-of-range indices or non-finite vertices.
  void validate() const;
};

TriangleMesh transform_mesh(const TriangleMesh& mesh, const Pose& pose);
/// Appends `other` to `mesh`, offsetting indices.
void append_mesh(TriangleMesh& mesh, const TriangleMesh& other);

/// Unsigned distance from `p` to the closest point on any triangle.
double distance_to_mesh(const TriangleMesh& mesh, const Vec3& p);

/// Wavefront OBJ: `v` and `f` records only (v/vt/vn forms, negative indices,
/// polygons fan-triangulated). Everything else is ignored.
TriangleMesh read_obj(std::istream& in);
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

}  // namespace usdrecon
