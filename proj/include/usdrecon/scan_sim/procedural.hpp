// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "usdrecon/scan_sim/mesh.hpp"

namespace usdrecon {

/// Closed axis-aligned box (12 outward-facing triangles).
TriangleMesh make_box(const Vec3& min, const Vec3& max);

/// Furniture built from boxes, resting on z = 0 and centered on the origin in
/// xy. Dimensions in meters.
TriangleMesh make_chair(double seat_width, double seat_depth, double seat_height,
                        double back_height);
TriangleMesh make_table(double width, double depth, double height);
TriangleMesh make_couch(double width, double depth, double height);
TriangleMesh make_cabinet(double width, double depth, double height);
TriangleMesh make_shelf(double width, double depth, double height, int shelves);
TriangleMesh make_wall(double length, double thickness, double height);

struct ProceduralAsset {
  std::string id;
  std::vector<std::string> labels;
  TriangleMesh mesh;
};

/// Deterministic twelve-asset catalogue (chairs, tables, couches, cabinets,
/// shelves, a trash can) used by the synthetic benchmarks and demos.
std::vector<ProceduralAsset> demo_catalogue();

}  // namespace usdrecon
