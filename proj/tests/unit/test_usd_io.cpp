#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "usdrecon/usd/usda.hpp"
#include "usdrecon/usd/waypoint.hpp"
#include "support/testing.hpp"

using namespace usdrecon;
using usdrecon::testing::error_code_of;

namespace {

std::optional<std::string> mesh_path(const std::string& id) { return "meshes/" + id + ".obj"; }

PlacedAsset chair_at(std::uint64_t id, const Vec3& t) {
  PlacedAsset p;
  p.instance_id = id;
  p.asset_id = "chair_office";
  p.label = "chair";
  p.pose = Pose::from_translation(t);
  p.local_bounds = Aabb{Vec3(-0.25, -0.25, 0), Vec3(0.25, 0.25, 0.9)};
  p.scores.occupied_voxels = 10;
  p.scores.total_voxels = 40;
  p.scores.distribution = 0.75;
  p.scores.density = 0.25;
  p.scores.mean = 2.0;
  p.scores.stddev = 0.5;
  p.combined = combined_score(p.scores);
  return p;
}

SceneState random_scene(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 8), frame(0, 500);
  std::uniform_real_distribution<double> u(0, 1), wide(-1e3, 1e3);
  const char* ids[] = {"chair_office", "table_side", "couch_two_seat", "shelf_book"};
  const char* labels[] = {"chair", "table", "couch", "trash can"};
  SceneState s;
  s.frame = frame(rng);
  const int n = count(rng);
  std::uint64_t id = 0;
  for (int i = 0; i < n; ++i) {
    PlacedAsset p;
    id += 1 + static_cast<std::uint64_t>(u(rng) * 50);
    p.instance_id = id;
    p.asset_id = ids[i % 4];
    p.label = labels[(i + 1) % 4];
    p.pose = usdrecon::testing::random_pose(rng, 20.0);
    if (i % 3 == 0) p.pose.translation.x() = wide(rng);
    const Vec3 half(u(rng) + 0.01, u(rng) + 0.01, u(rng) + 0.01);
    p.local_bounds = Aabb{-half, half};
    p.created_at = frame(rng);
    if (i % 4 == 3) {
      p.scores = ScoreBreakdown{};  // sentinel
      p.scores.total_voxels = 17;
    } else {
      p.scores.occupied_voxels = 1 + frame(rng);
      p.scores.total_voxels = p.scores.occupied_voxels + frame(rng);
      p.scores.distribution = 1.0 - 3.0 * u(rng);
      p.scores.density = u(rng);
      p.scores.mean = 1 + u(rng);
      p.scores.stddev = u(rng);
    }
    p.combined = combined_score(p.scores);
    s.placed.push_back(std::move(p));
  }
  return s;
}

}  // namespace

TEST(Emit, EmptySceneIsHeaderOnly) {
  const std::string text = emit_usda(SceneState{}, mesh_path);
  EXPECT_EQ(text.rfind("#usda 1.0", 0), 0u);
  const UsdaStage stage = parse_usda(text);
  EXPECT_TRUE(stage.prims.empty());
  EXPECT_EQ(text.find("def "), std::string::npos);
  EXPECT_TRUE(scene_from_stage(stage).placed.empty());
}

TEST(Emit, ChairTranslateLiteral) {
  SceneState s;
  s.placed.push_back(chair_at(1, Vec3(1, 2, 0)));
  const std::string text = emit_usda(s, mesh_path);
  EXPECT_NE(text.find("double3 xformOp:translate = (1, 2, 0)"), std::string::npos) << text;
  EXPECT_NE(text.find("def Xform \"object_1\""), std::string::npos);
  EXPECT_NE(text.find("prepend references = @meshes/chair_office.obj@"), std::string::npos);
  EXPECT_NE(text.find("custom string semantic:label = \"chair\""), std::string::npos);
  // Identity orientation, real part first in the file.
  EXPECT_NE(text.find("xformOp:orient = (1, 0, 0, 0)"), std::string::npos);
  EXPECT_NE(text.find("upAxis = \"Z\""), std::string::npos);
  EXPECT_NE(text.find("metersPerUnit = 1"), std::string::npos);
}

TEST(Emit, QuaternionOrderSwapped) {
  SceneState s;
  PlacedAsset p = chair_at(1, Vec3::Zero());
  p.pose = Pose::from_xyzw(Vec3::Zero(), {0.0, 0.0, std::sin(0.5), std::cos(0.5)});
  s.placed.push_back(p);
  const UsdaStage stage = parse_usda(emit_usda(s, mesh_path));
  const UsdaAttribute* orient = stage.prims[0].children[0].attribute("xformOp:orient");
  ASSERT_NE(orient, nullptr);
  ASSERT_EQ(orient->value->items.size(), 4u);
  EXPECT_NEAR(orient->value->items[0].number, std::cos(0.5), 1e-15);
  EXPECT_NEAR(orient->value->items[3].number, std::sin(0.5), 1e-15);
  EXPECT_NEAR(scene_from_stage(stage).placed[0].pose.yaw(), 1.0, 1e-12);
}

TEST(Emit, DeterministicAndOrderedById) {
  SceneState s;
  s.placed.push_back(chair_at(5, Vec3(0.1, 0.2, 0.3)));
  s.placed.push_back(chair_at(2, Vec3(-1.0 / 3.0, 2.0 / 3.0, 0)));
  const std::string a = emit_usda(s, mesh_path);
  EXPECT_EQ(a, emit_usda(s, mesh_path));
  EXPECT_LT(a.find("object_2"), a.find("object_5"));
}

TEST(Emit, UnresolvableAsset) {
  SceneState s;
  s.placed.push_back(chair_at(1, Vec3::Zero()));
  const AssetPathResolver none = [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
  EXPECT_EQ(error_code_of([&] { emit_usda(s, none); }), ErrorCode::kMissingAsset);
}

TEST(RoundTrip, ThreeObjectFixedPoint) {
  SceneState s;
  for (std::uint64_t i = 1; i <= 3; ++i) s.placed.push_back(chair_at(i, Vec3(0.1 * i, std::sqrt(2.0) * i, 0)));
  const std::string first = emit_usda(s, mesh_path);
  const std::string second = write_usda(parse_usda(first));
  EXPECT_EQ(first, second);
  EXPECT_EQ(emit_usda(scene_from_stage(parse_usda(first)), mesh_path), first);
}

TEST(RoundTrip, RandomScenes) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const SceneState s = random_scene(rng);
    const std::string text = emit_usda(s, mesh_path);
    const SceneState back = scene_from_stage(parse_usda(text));
    std::string why;
    ASSERT_TRUE(structurally_equal(s, back, 1e-12, 1e-6, &why)) << why << "\n" << text;
    for (std::size_t k = 0; k < s.placed.size(); ++k) {
      EXPECT_EQ(back.placed[k].pose.translation, s.placed[k].pose.translation);
    }
    EXPECT_EQ(write_usda(parse_usda(text)), text);
  }
}

TEST(RoundTrip, StructuralEqualityNoticesChanges) {
  SceneState a;
  a.placed.push_back(chair_at(1, Vec3(1, 2, 0)));
  SceneState b = a;
  b.placed[0].label = "table";
  std::string why;
  EXPECT_FALSE(structurally_equal(a, b, 1e-12, 1e-6, &why));
  EXPECT_FALSE(why.empty());
  b = a;
  b.placed[0].pose.translation.x() += 1e-9;
  EXPECT_FALSE(structurally_equal(a, b));
  EXPECT_TRUE(structurally_equal(a, b, 1e-8));
}

TEST(Parse, GeneralSubset) {
  const std::string text = R"(#usda 1.0
(
    defaultPrim = "Root"
    doc = "hand written"  # trailing comment
)

def Xform "Root" (
    kind = "group"
)
{
    float3[] extent = [(-1, -1, -1), (1, 1, 1)]
    custom string note = "quote \" and newline \n"
    token visibility = "inherited"

    def "Child" (
        prepend references = @./a b.usda@
    )
    {
        double radius = 2.5e-3
        custom int[] ids = [1, 2, 3]
    }
}
)";
  const UsdaStage stage = parse_usda(text);
  EXPECT_EQ(stage.default_prim(), "Root");
  ASSERT_EQ(stage.prims.size(), 1u);
  const UsdaPrim& root = stage.prims[0];
  EXPECT_EQ(root.type_name, "Xform");
  EXPECT_EQ(root.attribute("note")->value->text, "quote \" and newline \n");
  EXPECT_EQ(root.attribute("extent")->value->items.size(), 2u);
  const UsdaPrim* child = root.child("Child");
  ASSERT_NE(child, nullptr);
  EXPECT_TRUE(child->type_name.empty());
  EXPECT_EQ(child->reference(), "./a b.usda");
  EXPECT_DOUBLE_EQ(child->attribute("radius")->value->number, 2.5e-3);
  EXPECT_EQ(parse_usda(write_usda(stage)), stage);
}

TEST(Parse, Errors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_usda(text);
    } catch (const ParseError& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
      return e.line();
    }
    ADD_FAILURE() << "parsed: " << text;
    return 0;
  };
  EXPECT_EQ(line_of("#usda 1.0\ndef Xform \"A\"\n{\n    double x = 1\n"), 5u);
  EXPECT_EQ(line_of("#usda 1.0\ndef Xform \"A\"\n{\n}\n}\n"), 5u);
  EXPECT_EQ(line_of("#usda 1.0\ndef Xform \"A\"\n{\n}\ndef Xform \"A\"\n{\n}\n"), 5u);
  // The unterminated tuple is reported at the brace that cuts it off.
  EXPECT_EQ(line_of("#usda 1.0\ndef Xform \"A\"\n{\n    double x = (1, 2\n}\n"), 5u);
  EXPECT_EQ(line_of("#usda 1.0\ndef Xform \"A\"\n{\n    string s = \"open\n}\n"), 4u);
  EXPECT_EQ(line_of("not usda\n"), 1u);
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of("#usda 1.0\ndef Xform \"bad-name\"\n{\n}\n"), 2u);
}

TEST(Parse, Totality) {
  std::mt19937_64 rng(12);
  SceneState s;
  for (std::uint64_t i = 1; i <= 3; ++i) s.placed.push_back(chair_at(i, Vec3(i, -0.5 * i, 0)));
  const std::string good = emit_usda(s, mesh_path);
  const std::string alphabet = "(){}[]<>@\"'#=,.:-+e0123456789 \nabcXYZ_\\";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> op(0, 3), edits(1, 6);
  int parsed = 0, rejected = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string t = good;
    const int n = edits(rng);
    for (int e = 0; e < n && !t.empty(); ++e) {
      std::uniform_int_distribution<std::size_t> pos(0, t.size() - 1);
      switch (op(rng)) {
        case 0: t.erase(pos(rng), 1); break;
        case 1: t.insert(pos(rng), 1, alphabet[pick(rng)]); break;
        case 2: t[pos(rng)] = alphabet[pick(rng)]; break;
        default: t.resize(pos(rng)); break;
      }
    }
    try {
      const UsdaStage stage = parse_usda(t);
      ++parsed;
      // Whatever parses must re-serialize to something that parses the same.
      EXPECT_EQ(parse_usda(write_usda(stage)), stage);
    } catch (const ParseError& e) {
      ++rejected;
      EXPECT_GE(e.line(), 1u);
      EXPECT_GE(e.column(), 1u);
    } catch (const std::exception& e) {
      ADD_FAILURE() << "unpositioned failure: " << e.what();
    }
  }
  EXPECT_GT(rejected, 0);
  EXPECT_GT(parsed, 0);
}

TEST(Parse, PrimNames) {
  EXPECT_TRUE(is_valid_prim_name("object_12"));
  EXPECT_TRUE(is_valid_prim_name("_a"));
  EXPECT_FALSE(is_valid_prim_name("12abc"));
  EXPECT_FALSE(is_valid_prim_name(""));
  EXPECT_FALSE(is_valid_prim_name("a-b"));
}

TEST(SceneFromStage, MissingAttributes) {
  SceneState s;
  s.placed.push_back(chair_at(1, Vec3(1, 2, 0)));
  std::string text = emit_usda(s, mesh_path);
  const auto at = text.find("        double3 xformOp:translate");
  ASSERT_NE(at, std::string::npos);
  text.erase(at, text.find('\n', at) - at + 1);
  EXPECT_EQ(error_code_of([&] { scene_from_stage(parse_usda(text)); }), ErrorCode::kInvalidScene);
}

TEST(Waypoints, SingleAtOrigin) {
  const auto w = waypoints_from_json(R"({"waypoints": [{"position": {"x": 0, "y": 0, "z": 0},
      "orientation": {"qx": 0, "qy": 0, "qz": 0, "qw": 1}, "description": "start"}], "description": "plan"})");
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].position, Vec3::Zero());
  EXPECT_EQ(w[0].orientation, (std::array<double, 4>{0, 0, 0, 1}));
  EXPECT_EQ(w[0].description, "start");
}

TEST(Waypoints, OrderPreservedAndNormalized) {
  const WaypointPlan plan = parse_waypoint_plan(R"({"waypoints": [
      {"position": {"x": 1, "y": 2, "z": 0}, "orientation": {"qx": 0, "qy": 0, "qz": 0, "qw": 1.05}, "description": "first"},
      {"position": {"x": -1, "y": 0.5, "z": 0}, "orientation": {"qx": 0, "qy": 0, "qz": 0.7071, "qw": 0.7071}, "description": "second"}]})");
  ASSERT_EQ(plan.waypoints.size(), 2u);
  EXPECT_EQ(plan.waypoints[0].description, "first");
  EXPECT_EQ(plan.waypoints[1].description, "second");
  EXPECT_NEAR(plan.waypoints[0].orientation[3], 1.0, 1e-15);
  const auto& q = plan.waypoints[1].orientation;
  EXPECT_NEAR(std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]), 1.0, 1e-12);
  EXPECT_TRUE(plan.description.empty());

  const WaypointPlan back = parse_waypoint_plan(waypoints_to_json(plan));
  ASSERT_EQ(back.waypoints.size(), 2u);
  EXPECT_EQ(back.waypoints[1].position, plan.waypoints[1].position);
  EXPECT_EQ(back.waypoints[1].orientation, plan.waypoints[1].orientation);
}

TEST(Waypoints, SchemaErrorsListPaths) {
  auto message = [](const std::string& text) -> std::string {
    try {
      waypoints_from_json(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchema) << e.what();
      return e.what();
    }
    ADD_FAILURE() << "accepted: " << text;
    return {};
  };
  const std::string zero = message(R"({"waypoints": [{"position": {"x": 0, "y": 0, "z": 0},
      "orientation": {"qx": 0, "qy": 0, "qz": 0, "qw": 0}, "description": ""}]})");
  EXPECT_NE(zero.find("waypoints[0].orientation"), std::string::npos) << zero;

  const std::string two = message(R"({"waypoints": [
      {"position": {"x": "a", "y": 0, "z": 0}, "orientation": {"qx": 0, "qy": 0, "qz": 0, "qw": 1}, "description": ""},
      {"position": {"x": 0, "y": 0}, "orientation": {"qx": 0, "qy": 0, "qz": 0, "qw": 1}, "description": ""}]})");
  EXPECT_NE(two.find("waypoints[0].position.x"), std::string::npos) << two;
  EXPECT_NE(two.find("waypoints[1].position.z"), std::string::npos) << two;

  message(R"({"plan": []})");
  message(R"({"waypoints": [{"position": {"x": 0, "y": 0, "z": 0}, "orientation": {"qx": 0, "qy": 0, "qz": 0, "qw": 2}}]})");
  EXPECT_EQ(error_code_of([] { waypoints_from_json("{not json"); }), ErrorCode::kParse);
}
