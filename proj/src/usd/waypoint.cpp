// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/usd/waypoint.hpp"

#include <cmath>
#include <json.hpp>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {

using nlohmann::json;

void position_of_offset(std::string_view text, std::size_t offset, std::size_t& line,
                        std::size_t& column) {
  line = 1;
  column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
}

class SchemaReader {
 public:
  const json* member(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems_.push_back(path + "." + key + ": missing");
      return nullptr;
    }
    return &obj.at(key);
  }

  double number(const json& obj, const std::string& key, const std::string& path) {
    const json* v = member(obj, key, path);
    if (!v) return 0.0;
    if (!v->is_number()) {
      problems_.push_back(path + "." + key + ": not a number");
      return 0.0;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) problems_.push_back(path + "." + key + ": not finite");
    return d;
  }

  std::string string(const json& obj, const std::string& key, const std::string& path) {
    const json* v = member(obj, key, path);
    if (!v) return {};
    if (!v->is_string()) {
      problems_.push_back(path + "." + key + ": not a string");
      return {};
    }
    return v->get<std::string>();
  }

  void problem(std::string p) { problems_.push_back(std::move(p)); }
  bool ok() const { return problems_.empty(); }

  [[noreturn]] void raise() const {
    std::string msg = "waypoint schema violation:";
    for (const std::string& p : problems_) msg += " " + p + ";";
    msg.pop_back();
    throw Error(ErrorCode::kSchema, msg);
  }

 private:
  std::vector<std::string> problems_;
};

}  // namespace

WaypointPlan parse_waypoint_plan(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    position_of_offset(text, e.byte == 0 ? 0 : e.byte - 1, line, column);
    throw ParseError(line, column, "invalid JSON");
  }

  SchemaReader r;
  WaypointPlan plan;
  if (!doc.is_object()) {
    r.problem("$: not an object");
    r.raise();
  }
  if (doc.contains("description")) plan.description = r.string(doc, "description", "$");
  const json* list = r.member(doc, "waypoints", "$");
  if (list && !list->is_array()) r.problem("$.waypoints: not an array");
  if (!list || !list->is_array()) r.raise();

  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& item = (*list)[i];
    const std::string path = "$.waypoints[" + std::to_string(i) + "]";
    if (!item.is_object()) {
      r.problem(path + ": not an object");
      continue;
    }
    Waypoint w;
    if (const json* pos = r.member(item, "position", path)) {
      const std::string pp = path + ".position";
      w.position = Vec3(r.number(*pos, "x", pp), r.number(*pos, "y", pp), r.number(*pos, "z", pp));
    }
    if (const json* ori = r.member(item, "orientation", path)) {
      const std::string op = path + ".orientation";
      std::array<double, 4> q{r.number(*ori, "qx", op), r.number(*ori, "qy", op),
                              r.number(*ori, "qz", op), r.number(*ori, "qw", op)};
      const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
      if (!(n >= 0.9 && n <= 1.1)) {
        r.problem(op + ": quaternion norm " + std::to_string(n) + " outside [0.9, 1.1]");
      } else {
        for (double& c : q) c /= n;
      }
      w.orientation = q;
    }
    w.description = r.string(item, "description", path);
    plan.waypoints.push_back(std::move(w));
  }
  if (!r.ok()) r.raise();
  return plan;
}

std::vector<Waypoint> waypoints_from_json(std::string_view text) {
  return parse_waypoint_plan(text).waypoints;
}

std::string waypoints_to_json(const WaypointPlan& plan, int indent) {
  json doc;
  doc["description"] = plan.description;
  doc["waypoints"] = json::array();
  for (const Waypoint& w : plan.waypoints) {
    doc["waypoints"].push_back(
        {{"position", {{"x", w.position.x()}, {"y", w.position.y()}, {"z", w.position.z()}}},
         {"orientation",
          {{"qx", w.orientation[0]},
           {"qy", w.orientation[1]},
           {"qz", w.orientation[2]},
           {"qw", w.orientation[3]}}},
         {"description", w.description}});
  }
  return doc.dump(indent);
}

}  // namespace usdrecon
