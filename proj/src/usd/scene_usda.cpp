// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <sstream>

#include "usdrecon/error.hpp"
#include "usdrecon/usd/usda.hpp"

namespace usdrecon {

namespace {

constexpr std::string_view kObjectPrefix = "object_";

UsdaValue vec3_value(const Vec3& v) {
  return UsdaValue::tuple({UsdaValue::real(v.x()), UsdaValue::real(v.y()), UsdaValue::real(v.z())});
}

UsdaAttribute custom_attr(std::string type, std::string name, UsdaValue value) {
  UsdaAttribute a;
  a.custom = true;
  a.type = std::move(type);
  a.name = std::move(name);
  a.value = std::move(value);
  return a;
}

UsdaAttribute plain_attr(std::string type, std::string name, UsdaValue value) {
  UsdaAttribute a = custom_attr(std::move(type), std::move(name), std::move(value));
  a.custom = false;
  return a;
}

UsdaPrim object_prim(const PlacedAsset& p, const std::string& asset_path) {
  UsdaPrim prim;
  prim.type_name = "Xform";
  prim.name = std::string(kObjectPrefix) + std::to_string(p.instance_id);
  prim.metadata.push_back({"prepend", "references", UsdaValue::asset(asset_path)});

  auto& attrs = prim.attributes;
  attrs.push_back(custom_attr("string", "asset:id", UsdaValue::string(p.asset_id)));
  if (p.local_bounds) {
    attrs.push_back(custom_attr("double3", "bbox:local_max", vec3_value(p.local_bounds->max)));
    attrs.push_back(custom_attr("double3", "bbox:local_min", vec3_value(p.local_bounds->min)));
  }
  attrs.push_back(custom_attr("int", "frame:created",
                              UsdaValue::integer(static_cast<long long>(p.created_at))));
  attrs.push_back(custom_attr("double", "score:combined", UsdaValue::real(p.combined)));
  attrs.push_back(custom_attr("double", "score:density", UsdaValue::real(p.scores.density)));
  attrs.push_back(
      custom_attr("double", "score:distribution", UsdaValue::real(p.scores.distribution)));
  attrs.push_back(custom_attr("double", "score:mean", UsdaValue::real(p.scores.mean)));
  attrs.push_back(custom_attr("int", "score:occupied_voxels",
                              UsdaValue::integer(static_cast<long long>(p.scores.occupied_voxels))));
  attrs.push_back(custom_attr("double", "score:stddev", UsdaValue::real(p.scores.stddev)));
  attrs.push_back(custom_attr("int", "score:total_voxels",
                              UsdaValue::integer(static_cast<long long>(p.scores.total_voxels))));
  attrs.push_back(custom_attr("string", "semantic:label", UsdaValue::string(p.label)));

  // q and -q are the same rotation; emit the w >= 0 representative.
  Eigen::Quaterniond q = p.pose.rotation;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  attrs.push_back(plain_attr("quatd", "xformOp:orient",
                             UsdaValue::tuple({UsdaValue::real(q.w()), UsdaValue::real(q.x()),
                                               UsdaValue::real(q.y()), UsdaValue::real(q.z())})));
  attrs.push_back(plain_attr("double3", "xformOp:translate", vec3_value(p.pose.translation)));
  UsdaAttribute order = plain_attr(
      "token[]", "xformOpOrder",
      UsdaValue::array({UsdaValue::string("xformOp:translate"), UsdaValue::string("xformOp:orient")}));
  order.uniform = true;
  attrs.push_back(std::move(order));
  return prim;
}

[[noreturn]] void bad_scene(const std::string& prim, const std::string& msg) {
  throw Error(ErrorCode::kInvalidScene, prim + ": " + msg);
}

const UsdaValue& require(const UsdaPrim& prim, std::string_view name) {
  const UsdaAttribute* a = prim.attribute(name);
  if (!a || !a->value) bad_scene(prim.name, "missing attribute " + std::string(name));
  return *a->value;
}

double number_of(const UsdaPrim& prim, std::string_view name, const UsdaValue& v) {
  if (v.kind != UsdaValue::Kind::kNumber) {
    bad_scene(prim.name, "attribute " + std::string(name) + " is not a number");
  }
  return v.number;
}

std::vector<double> numbers_of(const UsdaPrim& prim, std::string_view name, std::size_t n) {
  const UsdaValue& v = require(prim, name);
  if (v.kind != UsdaValue::Kind::kTuple || v.items.size() != n) {
    bad_scene(prim.name, "attribute " + std::string(name) + " needs " + std::to_string(n) +
                             " components");
  }
  std::vector<double> out;
  for (const UsdaValue& item : v.items) out.push_back(number_of(prim, name, item));
  return out;
}

Vec3 vec3_of(const UsdaPrim& prim, std::string_view name) {
  const auto v = numbers_of(prim, name, 3);
  return {v[0], v[1], v[2]};
}

double optional_number(const UsdaPrim& prim, std::string_view name, double fallback) {
  const UsdaAttribute* a = prim.attribute(name);
  if (!a || !a->value) return fallback;
  return number_of(prim, name, *a->value);
}

std::size_t optional_count(const UsdaPrim& prim, std::string_view name) {
  const double v = optional_number(prim, name, 0.0);
  if (!(v >= 0.0) || v != std::floor(v)) bad_scene(prim.name, std::string(name) + " must be a count");
  return static_cast<std::size_t>(v);
}

std::string string_of(const UsdaPrim& prim, std::string_view name) {
  const UsdaValue& v = require(prim, name);
  if (v.kind != UsdaValue::Kind::kString) {
    bad_scene(prim.name, "attribute " + std::string(name) + " is not a string");
  }
  return v.text;
}

PlacedAsset placed_from_prim(const UsdaPrim& prim) {
  PlacedAsset p;
  const std::string digits = prim.name.substr(kObjectPrefix.size());
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit) ||
      digits.size() > 19) {
    bad_scene(prim.name, "object prims are named object_<instance id>");
  }
  p.instance_id = std::stoull(digits);
  p.asset_id = string_of(prim, "asset:id");
  p.label = string_of(prim, "semantic:label");

  const Vec3 t = vec3_of(prim, "xformOp:translate");
  if (!t.allFinite()) bad_scene(prim.name, "non-finite translate");
  const auto q = numbers_of(prim, "xformOp:orient", 4);  // w, x, y, z on disk
  Eigen::Quaterniond rot(q[0], q[1], q[2], q[3]);
  const double norm = rot.norm();
  if (!std::isfinite(norm) || norm == 0.0) bad_scene(prim.name, "invalid orientation");
  // Keep unit quaternions bit-exact so re-emission is byte-identical.
  if (std::abs(norm - 1.0) > 1e-9) rot.normalize();
  p.pose.translation = t;
  p.pose.rotation = rot;

  if (prim.attribute("bbox:local_min") || prim.attribute("bbox:local_max")) {
    p.local_bounds = Aabb{vec3_of(prim, "bbox:local_min"), vec3_of(prim, "bbox:local_max")};
  }
  p.created_at = optional_count(prim, "frame:created");
  p.combined = optional_number(prim, "score:combined", kNoSupportScore);
  p.scores.density = optional_number(prim, "score:density", 0.0);
  p.scores.distribution = optional_number(prim, "score:distribution", kNoSupportScore);
  p.scores.mean = optional_number(prim, "score:mean", 0.0);
  p.scores.stddev = optional_number(prim, "score:stddev", 0.0);
  p.scores.occupied_voxels = optional_count(prim, "score:occupied_voxels");
  p.scores.total_voxels = optional_count(prim, "score:total_voxels");
  return p;
}

}  // namespace

UsdaStage stage_from_scene(const SceneState& scene, const AssetPathResolver& resolve) {
  UsdaStage stage;
  stage.metadata = {{"", "metersPerUnit", UsdaValue::integer(1)},
                    {"", "upAxis", UsdaValue::string("Z")}};
  // Nothing to place: header only, no prims (the frame counter is dropped).
  if (scene.placed.empty() && !scene.bounds) return stage;
  stage.metadata.insert(stage.metadata.begin(), {"", "defaultPrim", UsdaValue::string("World")});
  UsdaPrim world;
  world.type_name = "Xform";
  world.name = "World";
  world.attributes.push_back(
      custom_attr("int", "scene:frame", UsdaValue::integer(static_cast<long long>(scene.frame))));
  if (scene.bounds) {
    world.attributes.push_back(custom_attr("double3", "scene:bounds_max", vec3_value(scene.bounds->max)));
    world.attributes.push_back(custom_attr("double3", "scene:bounds_min", vec3_value(scene.bounds->min)));
  }

  std::vector<const PlacedAsset*> ordered;
  for (const PlacedAsset& p : scene.placed) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(), [](const PlacedAsset* a, const PlacedAsset* b) {
    return a->instance_id < b->instance_id;
  });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->instance_id == ordered[i - 1]->instance_id) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate instance id " + std::to_string(ordered[i]->instance_id));
    }
  }
  for (const PlacedAsset* p : ordered) {
    validate_pose(p->pose, 1e-6);
    if (!p->pose.translation.allFinite()) throw Error(ErrorCode::kInvalidInput, "non-finite translate");
    const std::optional<std::string> path = resolve ? resolve(p->asset_id) : std::nullopt;
    if (!path) throw Error(ErrorCode::kMissingAsset, "no file for asset '" + p->asset_id + "'");
    world.children.push_back(object_prim(*p, *path));
  }
  stage.prims.push_back(std::move(world));
  return stage;
}

std::string emit_usda(const SceneState& scene, const AssetPathResolver& resolve) {
  return write_usda(stage_from_scene(scene, resolve));
}

SceneState scene_from_stage(const UsdaStage& stage) {
  SceneState scene;
  const std::string root_name = stage.default_prim().value_or("World");
  const UsdaPrim* root = nullptr;
  for (const UsdaPrim& p : stage.prims) {
    if (p.name == root_name) root = &p;
  }
  if (!root) return scene;

  if (const UsdaAttribute* f = root->attribute("scene:frame"); f && f->value) {
    scene.frame = optional_count(*root, "scene:frame");
  }
  if (root->attribute("scene:bounds_min") || root->attribute("scene:bounds_max")) {
    scene.bounds = Aabb{vec3_of(*root, "scene:bounds_min"), vec3_of(*root, "scene:bounds_max")};
  }
  for (const UsdaPrim& child : root->children) {
    if (child.name.rfind(kObjectPrefix, 0) != 0) continue;
    scene.placed.push_back(placed_from_prim(child));
  }
  return scene;
}

namespace {

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool structurally_equal(const SceneState& a, const SceneState& b, double translate_tol,
                        double rotation_tol, std::string* why) {
  const auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  const bool a_blank = a.placed.empty() && !a.bounds;
  const bool b_blank = b.placed.empty() && !b.bounds;
  if (a_blank && b_blank) return true;
  if (a.frame != b.frame) return fail("frame differs");
  if (a.bounds.has_value() != b.bounds.has_value()) return fail("bounds presence differs");
  if (a.bounds && (a.bounds->min != b.bounds->min || a.bounds->max != b.bounds->max)) {
    return fail("bounds differ");
  }
  if (a.placed.size() != b.placed.size()) return fail("placement count differs");

  auto sorted = [](const SceneState& s) {
    std::vector<const PlacedAsset*> v;
    for (const PlacedAsset& p : s.placed) v.push_back(&p);
    std::sort(v.begin(), v.end(), [](auto* x, auto* y) { return x->instance_id < y->instance_id; });
    return v;
  };
  const auto pa = sorted(a);
  const auto pb = sorted(b);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const PlacedAsset& x = *pa[i];
    const PlacedAsset& y = *pb[i];
    const std::string tag = "object_" + std::to_string(x.instance_id) + ": ";
    if (x.instance_id != y.instance_id) return fail("instance ids differ");
    if (x.asset_id != y.asset_id) return fail(tag + "asset id differs");
    if (x.label != y.label) return fail(tag + "label differs");
    if (x.created_at != y.created_at) return fail(tag + "frame differs");
    if ((x.pose.translation - y.pose.translation).cwiseAbs().maxCoeff() > translate_tol) {
      return fail(tag + "translation differs");
    }
    if (rotation_angle_between(x.pose, y.pose) > rotation_tol) return fail(tag + "rotation differs");
    if (x.local_bounds.has_value() != y.local_bounds.has_value() ||
        (x.local_bounds &&
         (x.local_bounds->min != y.local_bounds->min || x.local_bounds->max != y.local_bounds->max))) {
      return fail(tag + "bounds differ");
    }
    const ScoreBreakdown& s = x.scores;
    const ScoreBreakdown& t = y.scores;
    if (!same_double(x.combined, y.combined) || !same_double(s.density, t.density) ||
        !same_double(s.distribution, t.distribution) || !same_double(s.mean, t.mean) ||
        !same_double(s.stddev, t.stddev) || s.occupied_voxels != t.occupied_voxels ||
        s.total_voxels != t.total_voxels) {
      return fail(tag + "scores differ");
    }
  }
  return true;
}

}  // namespace usdrecon
