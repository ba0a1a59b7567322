// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "usdrecon/geometry/pose.hpp"

namespace usdrecon {

struct Waypoint {
  Vec3 position = Vec3::Zero();
  std::array<double, 4> orientation{0.0, 0.0, 0.0, 1.0};  ///< qx, qy, qz, qw
  std::string description;
};

struct WaypointPlan {
  std::vector<Waypoint> waypoints;
  std::string description;
};

/// Reads {"waypoints": [{"position": {x, y, z}, "orientation": {qx, qy, qz,
/// qw}, "description": "..."}], "description": "..."}. The top-level
/// description may be absent. Quaternions with norm in [0.9, 1.1] are
/// normalized; anything else is rejected. Malformed JSON raises ParseError,
/// schema problems kSchema with every offending path listed.
WaypointPlan parse_waypoint_plan(std::string_view text);
std::vector<Waypoint> waypoints_from_json(std::string_view text);

std::string waypoints_to_json(const WaypointPlan& plan, int indent = 2);

}  // namespace usdrecon
