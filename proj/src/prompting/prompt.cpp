// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "usdrecon/error.hpp"
#include "usdrecon/prompting/prompting.hpp"
#include "usdrecon/usd/usda.hpp"

namespace usdrecon {

const std::string& navigation_system_prompt() {
  static const std::string text =
      "You plan navigation waypoints for a mobile robot.\n"
      "The user sends a USDA file describing the current scene, followed by a task.\n"
      "Every object is an object_<k> prim: xformOp:translate is its position in meters "
      "(z up), xformOp:orient its rotation, semantic:label its class, and "
      "bbox:local_min / bbox:local_max its extent in the object's own frame.\n"
      "\n"
      "Answer with a list of waypoints. For each one give a position (x, y, z), an "
      "orientation quaternion as qx, qy, qz, qw, and a one-line description.\n"
      "A task naming one object needs one waypoint next to that object; a task naming "
      "several needs them in visiting order. Waypoints must stay inside the scene and "
      "outside every object's box.\n"
      "\n"
      "Reply with a single JSON object and nothing else:\n"
      "{\"waypoints\": [{\"position\": {\"x\": 0.0, \"y\": 0.0, \"z\": 0.0}, "
      "\"orientation\": {\"qx\": 0.0, \"qy\": 0.0, \"qz\": 0.0, \"qw\": 1.0}, "
      "\"description\": \"...\"}], \"description\": \"...\"}\n";
  return text;
}

std::string PromptBundle::user_message() const {
  return "Scene (USDA):\n" + scene_usda + "\nTask: " + user_task;
}

PromptBundle build_prompt(std::string_view scene_usda, std::string_view task) {
  try {
    parse_usda(scene_usda);
  } catch (const ParseError& e) {
    throw Error(ErrorCode::kInvalidScene, std::string("scene USDA does not parse: ") + e.what());
  }
  return {navigation_system_prompt(), std::string(scene_usda), std::string(task)};
}

void EndpointConfig::validate() const {
  if (!(timeout_seconds > 0.0)) throw Error(ErrorCode::kInvalidInput, "timeout must be positive");
  if (!(mock_standoff > 0.0) || !(clearance >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "invalid mock standoff or clearance");
  }
  if (mock) return;
  if (base_url.empty()) throw Error(ErrorCode::kInvalidInput, "endpoint base_url is empty");
  if (model.empty()) throw Error(ErrorCode::kInvalidInput, "endpoint model is empty");
}

std::optional<std::string> EndpointConfig::api_key() const {
  if (api_key_env.empty()) return std::nullopt;
  const char* v = std::getenv(api_key_env.c_str());
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

// --- planning geometry -------------------------------------------------------

Aabb planning_box(const PlacedAsset& placement) {
  if (placement.local_bounds || !placement.registered_cloud.empty()) return world_bounds(placement);
  return {placement.pose.translation, placement.pose.translation};
}

Aabb default_plan_bounds(const SceneState& scene, double margin) {
  if (scene.placed.empty()) {
    return {Vec3::Constant(-margin), Vec3::Constant(margin)};
  }
  Aabb box = planning_box(scene.placed.front());
  for (const PlacedAsset& p : scene.placed) {
    const Aabb b = planning_box(p);
    box.expand(b.min);
    box.expand(b.max);
  }
  return box.inflated(margin);
}

namespace {

bool inside_xy(const Aabb& box, double x, double y) {
  return x >= box.min.x() && x <= box.max.x() && y >= box.min.y() && y <= box.max.y();
}

// First violation for a point, or empty.
std::string violation_at(const Vec3& p, const std::vector<const PlacedAsset*>& ordered,
                         const Aabb& bounds, double clearance) {
  if (!inside_xy(bounds, p.x(), p.y())) return "out of bounds";
  for (const PlacedAsset* a : ordered) {
    if (inside_xy(planning_box(*a).inflated(clearance), p.x(), p.y())) {
      return "inside object_" + std::to_string(a->instance_id);
    }
  }
  return {};
}

std::vector<const PlacedAsset*> by_instance(const SceneState& scene) {
  std::vector<const PlacedAsset*> v;
  for (const PlacedAsset& p : scene.placed) v.push_back(&p);
  std::sort(v.begin(), v.end(),
            [](auto* a, auto* b) { return a->instance_id < b->instance_id; });
  return v;
}

std::string words_of(std::string_view text) {
  std::string out = " ";
  for (char c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (out.back() != ' ') {
      out.push_back(' ');
    }
  }
  if (out.back() != ' ') out.push_back(' ');
  return out;
}

bool mentions(const std::string& task_words, const std::string& label) {
  const std::string l = words_of(label);
  if (l == " ") return false;
  const std::string stem = l.substr(0, l.size() - 1);
  return task_words.find(l) != std::string::npos ||
         task_words.find(stem + "s ") != std::string::npos ||
         task_words.find(stem + "es ") != std::string::npos;
}

std::array<double, 4> yaw_quaternion(double yaw) {
  return {0.0, 0.0, std::sin(0.5 * yaw), std::cos(0.5 * yaw)};
}

}  // namespace

WaypointPlan mock_plan(const SceneState& scene, std::string_view task, double standoff,
                       double clearance) {
  const std::string task_words = words_of(task);
  const Aabb bounds = scene.bounds.value_or(default_plan_bounds(scene));
  const auto ordered = by_instance(scene);

  WaypointPlan plan;
  // Front first, then alternating to either side, back last.
  constexpr int kHeadingOrder[8] = {0, 1, 7, 2, 6, 3, 5, 4};
  for (const PlacedAsset* a : ordered) {
    if (!mentions(task_words, a->label)) continue;
    const Vec3 facing = a->pose.rotation * Vec3::UnitX();
    const double base_yaw = std::hypot(facing.x(), facing.y()) > 1e-9
                                ? std::atan2(facing.y(), facing.x())
                                : 0.0;
    const Vec3 c = a->pose.translation;
    bool placed = false;
    for (int ring = 0; ring <= 12 && !placed; ++ring) {
      const double dist = standoff + 0.25 * ring;
      for (int k : kHeadingOrder) {
        const double heading = base_yaw + k * std::numbers::pi / 4.0;
        const Vec3 p(c.x() + dist * std::cos(heading), c.y() + dist * std::sin(heading), c.z());
        if (!violation_at(p, ordered, bounds, clearance).empty()) continue;
        Waypoint w;
        w.position = p;
        w.orientation = yaw_quaternion(heading + std::numbers::pi);
        w.description = "view object_" + std::to_string(a->instance_id) + " (" + a->label + ")";
        plan.waypoints.push_back(std::move(w));
        placed = true;
        break;
      }
    }
  }
  plan.description = plan.waypoints.empty()
                         ? "no object in the scene matches the task"
                         : "visit " + std::to_string(plan.waypoints.size()) + " matching object(s)";
  return plan;
}

double path_length_xy(const std::vector<Waypoint>& waypoints) {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    total += std::hypot(waypoints[i].position.x() - waypoints[i - 1].position.x(),
                        waypoints[i].position.y() - waypoints[i - 1].position.y());
  }
  return total;
}

PlanReport validate_waypoints(const std::vector<Waypoint>& waypoints, const SceneState& scene,
                              const Aabb& bounds, double clearance) {
  PlanReport report;
  report.waypoints = waypoints;
  const auto ordered = by_instance(scene);
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const Vec3& p = waypoints[i].position;
    if (!inside_xy(bounds, p.x(), p.y())) report.violations.push_back({i, "out of bounds"});
    for (const PlacedAsset* a : ordered) {
      if (inside_xy(planning_box(*a).inflated(clearance), p.x(), p.y())) {
        report.violations.push_back({i, "inside object_" + std::to_string(a->instance_id)});
      }
    }
  }
  report.path_length = path_length_xy(waypoints);
  return report;
}

std::vector<Waypoint> reorder_nearest_neighbor(const std::vector<Waypoint>& waypoints) {
  if (waypoints.size() < 3) return waypoints;
  std::vector<Waypoint> out{waypoints.front()};
  std::vector<bool> used(waypoints.size(), false);
  used[0] = true;
  for (std::size_t step = 1; step < waypoints.size(); ++step) {
    const Vec3& last = out.back().position;
    std::size_t best = waypoints.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < waypoints.size(); ++j) {
      if (used[j]) continue;
      const double d = std::hypot(waypoints[j].position.x() - last.x(),
                                  waypoints[j].position.y() - last.y());
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    out.push_back(waypoints[best]);
  }
  return out;
}

}  // namespace usdrecon
