// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usdrecon/reconciliation/scene.hpp"
#include "usdrecon/usd/waypoint.hpp"

namespace usdrecon {

/// System instructions for the planner model: how to read the emitted USDA
/// and the exact JSON reply shape (see waypoint.hpp).
const std::string& navigation_system_prompt();

struct PromptBundle {
  std::string system_text;
  std::string scene_usda;
  std::string user_task;
  /// User turn: the scene file followed by the task.
  std::string user_message() const;
};

/// Throws kInvalidScene when `scene_usda` does not parse.
PromptBundle build_prompt(std::string_view scene_usda, std::string_view task);

struct EndpointConfig {
  std::string base_url;                        ///< e.g. "https://host:443"
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env = "USDRECON_API_KEY";
  double timeout_seconds = 60.0;
  bool mock = false;
  std::uint64_t seed = 0;      ///< forwarded to the endpoint; the mock is seed-independent
  double mock_standoff = 0.75; ///< meters in front of a matched object
  double clearance = 0.1;      ///< keep-out margin shared with validate_waypoints

  /// Throws kInvalidInput on a non-positive timeout or a missing URL/model
  /// outside mock mode.
  void validate() const;
  std::optional<std::string> api_key() const;
};

/// Mock mode plans locally from the scene. Otherwise posts one
/// chat-completion request ({model, messages, response_format json_object})
/// and parses choices[0].message.content. A reply that is not JSON is retried
/// once with a repair request; failures map to kNetwork, kTimeout,
/// kInvalidResponse and kSchema respectively.
WaypointPlan request_plan(const PromptBundle& bundle, const EndpointConfig& endpoint);
std::vector<Waypoint> request_waypoints(const PromptBundle& bundle, const EndpointConfig& endpoint);

/// Deterministic planner behind mock mode: one waypoint per object whose
/// label occurs in the task, `standoff` meters along the object's facing
/// (+x) direction, turned to face it. Falls back to other headings and
/// larger standoffs until the waypoint is clear of every object and inside
/// the scene bounds.
WaypointPlan mock_plan(const SceneState& scene, std::string_view task, double standoff = 0.75,
                       double clearance = 0.1);

struct PlanViolation {
  std::size_t index;
  std::string reason;  ///< "inside object_<k>" or "out of bounds"
};

struct PlanReport {
  std::vector<Waypoint> waypoints;
  std::vector<PlanViolation> violations;
  double path_length = 0.0;  ///< sum of consecutive xy distances
};

/// xy box an object occupies for planning: its world bounds, or the bare
/// translation when neither bounds nor a cloud are known.
Aabb planning_box(const PlacedAsset& placement);

/// Scene extent used when a stage carries no explicit bounds: the union of
/// object boxes grown by `margin`.
Aabb default_plan_bounds(const SceneState& scene, double margin = 2.0);

/// Flags waypoints outside `bounds` (xy) or inside any object's xy box grown
/// by `clearance`. 2D only; z is ignored.
PlanReport validate_waypoints(const std::vector<Waypoint>& waypoints, const SceneState& scene,
                              const Aabb& bounds, double clearance = 0.1);

/// Greedy nearest-neighbor order starting from the first waypoint.
std::vector<Waypoint> reorder_nearest_neighbor(const std::vector<Waypoint>& waypoints);

double path_length_xy(const std::vector<Waypoint>& waypoints);

}  // namespace usdrecon
