#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "usdrecon/prompting/prompting.hpp"
#include "usdrecon/usd/usda.hpp"
#include "support/testing.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

using namespace usdrecon;
using usdrecon::testing::error_code_of;
using nlohmann::json;

namespace {

std::optional<std::string> mesh_path(const std::string& id) { return "meshes/" + id + ".obj"; }

PlacedAsset object(std::uint64_t id, const std::string& label, const Vec3& at, const Vec3& size,
                   double yaw = 0.0) {
  PlacedAsset p;
  p.instance_id = id;
  p.asset_id = label + "_" + std::to_string(id);
  p.label = label;
  p.pose = Pose::from_yaw(yaw, at);
  p.local_bounds = Aabb{Vec3(-size.x() / 2, -size.y() / 2, 0), Vec3(size.x() / 2, size.y() / 2, size.z())};
  return p;
}

Waypoint wp(double x, double y) {
  Waypoint w;
  w.position = Vec3(x, y, 0);
  return w;
}

const char* kPlanJson = R"({"waypoints": [{"position": {"x": 1, "y": 2, "z": 0},
  "orientation": {"qx": 0, "qy": 0, "qz": 0, "qw": 1}, "description": "by the door"}],
  "description": "short hop"})";

std::string chat_reply(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

// Loopback chat endpoint; `handler` decides each reply.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      bodies.push_back(json::parse(req.body));
      if (req.has_header("Authorization")) auth = req.get_header_value("Authorization");
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  EndpointConfig config() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_);
    c.model = "test-model";
    c.timeout_seconds = 5.0;
    c.api_key_env = "R2U_TEST_KEY";
    return c;
  }

  std::atomic<int> requests{0};
  std::vector<json> bodies;
  std::string auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

PromptBundle small_bundle() {
  SceneState s;
  s.placed.push_back(object(1, "chair", Vec3(2, 1, 0), Vec3(0.5, 0.5, 0.9)));
  return build_prompt(emit_usda(s, mesh_path), "navigate to the chair");
}

}  // namespace

TEST(Prompt, EmptySceneBuilds) {
  const PromptBundle b = build_prompt(emit_usda(SceneState{}, mesh_path), "go to the chair");
  EXPECT_FALSE(b.system_text.empty());
  EXPECT_EQ(b.system_text, navigation_system_prompt());
  EXPECT_EQ(b.user_task, "go to the chair");
}

TEST(Prompt, ContainsEveryPrimName) {
  SceneState s;
  s.placed.push_back(object(3, "bed", Vec3(0, 0, 0), Vec3(2, 1, 0.5)));
  s.placed.push_back(object(7, "chair", Vec3(3, 0, 0), Vec3(0.5, 0.5, 0.9)));
  s.placed.push_back(object(12, "cabinet", Vec3(0, 4, 0), Vec3(0.8, 0.4, 1.8)));
  const PromptBundle b = build_prompt(emit_usda(s, mesh_path), "tour the ward, visiting every bed and cabinet");
  const std::string msg = b.user_message();
  for (const char* name : {"object_3", "object_7", "object_12"}) EXPECT_NE(msg.find(name), std::string::npos) << name;
  EXPECT_NE(msg.find("tour the ward"), std::string::npos);
  EXPECT_LT(msg.find("object_12"), msg.find("tour the ward"));
}

TEST(Prompt, MalformedSceneRejected) {
  EXPECT_EQ(error_code_of([] { build_prompt("#usda 1.0\ndef Xform \"A\"\n{\n", "go"); }), ErrorCode::kInvalidScene);
}

TEST(Endpoint, ConfigValidation) {
  EndpointConfig c;
  c.mock = true;
  EXPECT_NO_THROW(c.validate());
  c.timeout_seconds = 0;
  EXPECT_EQ(error_code_of([&] { c.validate(); }), ErrorCode::kInvalidInput);
  c = EndpointConfig{};
  EXPECT_EQ(error_code_of([&] { c.validate(); }), ErrorCode::kInvalidInput);  // no URL outside mock mode
}

TEST(Mock, OneChair) {
  EndpointConfig c;
  c.mock = true;
  const auto w = request_waypoints(small_bundle(), c);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_LE((w[0].position.head<2>() - Eigen::Vector2d(2, 1)).norm(), 1.0);
  // Facing the chair.
  const Pose facing = Pose::from_xyzw(w[0].position, w[0].orientation);
  const Vec3 ahead = facing.rotation * Vec3::UnitX();
  EXPECT_GT(ahead.head<2>().dot((Eigen::Vector2d(2, 1) - w[0].position.head<2>()).normalized()), 0.99);
}

TEST(Mock, EmptySceneNoWaypoints) {
  EndpointConfig c;
  c.mock = true;
  EXPECT_TRUE(request_waypoints(build_prompt(emit_usda(SceneState{}, mesh_path), "navigate to the chair"), c).empty());
}

TEST(Mock, DeterministicAcrossSeeds) {
  EndpointConfig c;
  c.mock = true;
  const auto a = request_waypoints(small_bundle(), c);
  c.seed = 99;
  const auto b = request_waypoints(small_bundle(), c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].position, b[i].position);
    EXPECT_EQ(a[i].orientation, b[i].orientation);
    EXPECT_EQ(a[i].description, b[i].description);
  }
}

TEST(Mock, WaypointsAlwaysValidOnTheirScene) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-4, 4), yaw(-3.14, 3.14), sz(0.3, 1.5);
  const char* labels[] = {"chair", "table", "couch", "cabinet"};
  int produced = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SceneState s;
    for (std::uint64_t i = 1; i <= 6; ++i) {
      s.placed.push_back(object(i, labels[i % 4], Vec3(pos(rng), pos(rng), 0), Vec3(sz(rng), sz(rng), 0.8), yaw(rng)));
    }
    EndpointConfig c;
    c.mock = true;
    const std::string usda = emit_usda(s, mesh_path);
    const auto w = request_waypoints(build_prompt(usda, "visit each chair and then the couch"), c);
    produced += static_cast<int>(w.size());
    const SceneState parsed = scene_from_stage(parse_usda(usda));
    const Aabb bounds = parsed.bounds.value_or(default_plan_bounds(parsed));
    const PlanReport r = validate_waypoints(w, parsed, bounds, c.clearance);
    EXPECT_TRUE(r.violations.empty()) << r.violations.front().reason;
  }
  EXPECT_GT(produced, 100);
}

TEST(Validate, InsideTableFootprint) {
  SceneState s;
  s.placed.push_back(object(4, "table", Vec3(0, 0, 0), Vec3(1.2, 0.8, 0.75)));
  const Aabb bounds{Vec3(-5, -5, -1), Vec3(5, 5, 3)};
  const PlanReport r = validate_waypoints({wp(0.1, 0.1), wp(0.65, 0), wp(2, 2)}, s, bounds);
  ASSERT_EQ(r.violations.size(), 2u);  // the second is within the clearance margin
  EXPECT_EQ(r.violations[0].index, 0u);
  EXPECT_EQ(r.violations[0].reason, "inside object_4");
  EXPECT_EQ(r.violations[1].index, 1u);
}

TEST(Validate, OutOfBounds) {
  const Aabb bounds{Vec3(-5, -5, -1), Vec3(5, 5, 3)};
  const PlanReport r = validate_waypoints({wp(6, 6)}, SceneState{}, bounds);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].reason, "out of bounds");
}

TEST(Validate, SquareTourPathLength) {
  const std::vector<Waypoint> square = {wp(0, 0), wp(2, 0), wp(2, 2), wp(0, 2)};
  const Aabb bounds{Vec3(-5, -5, -1), Vec3(5, 5, 3)};
  const PlanReport r = validate_waypoints(square, SceneState{}, bounds);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_DOUBLE_EQ(r.path_length, 6.0);
  EXPECT_EQ(r.waypoints.size(), 4u);
  EXPECT_EQ(r.waypoints[2].position, Vec3(2, 2, 0));
}

TEST(Validate, PathLengthTranslationInvariantAndZIgnored) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int t = 0; t < 50; ++t) {
    std::vector<Waypoint> w(8);
    for (Waypoint& x : w) x = wp(u(rng), u(rng));
    const double base = path_length_xy(w);
    const Vec3 shift(u(rng), u(rng), u(rng));
    for (Waypoint& x : w) x.position += shift;
    EXPECT_NEAR(path_length_xy(w), base, 1e-9);
  }
}

TEST(Validate, ReorderNearestNeighbor) {
  const std::vector<Waypoint> w = {wp(0, 0), wp(5, 0), wp(1, 0), wp(4, 0), wp(2, 0)};
  const auto r = reorder_nearest_neighbor(w);
  ASSERT_EQ(r.size(), 5u);
  std::vector<double> xs;
  for (const Waypoint& x : r) xs.push_back(x.position.x());
  EXPECT_EQ(xs, (std::vector<double>{0, 1, 2, 4, 5}));
  EXPECT_LE(path_length_xy(r), path_length_xy(w));
  EXPECT_TRUE(reorder_nearest_neighbor({}).empty());
}

TEST(Live, SuccessfulRequest) {
  FakeEndpoint server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_reply(std::string("```json\n") + kPlanJson + "\n```"), "application/json");
  });
  ::setenv("R2U_TEST_KEY", "sekret", 1);
  const WaypointPlan plan = request_plan(small_bundle(), server.config());
  ::unsetenv("R2U_TEST_KEY");
  ASSERT_EQ(plan.waypoints.size(), 1u);
  EXPECT_EQ(plan.waypoints[0].position, Vec3(1, 2, 0));
  EXPECT_EQ(plan.description, "short hop");
  ASSERT_EQ(server.requests, 1);
  const json& body = server.bodies[0];
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["response_format"]["type"], "json_object");
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["role"], "user");
  EXPECT_NE(body["messages"][1]["content"].get<std::string>().find("object_1"), std::string::npos);
  EXPECT_EQ(server.auth, "Bearer sekret");
}

TEST(Live, RetriesOnceThenGivesUp) {
  FakeEndpoint server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_reply("Sure! Here are your waypoints."), "application/json");
  });
  EXPECT_EQ(error_code_of([&] { request_plan(small_bundle(), server.config()); }), ErrorCode::kInvalidResponse);
  EXPECT_EQ(server.requests, 2);
  EXPECT_GT(server.bodies[1]["messages"].size(), server.bodies[0]["messages"].size());
}

TEST(Live, RepairSucceeds) {
  FakeEndpoint server([&](const httplib::Request& req, httplib::Response& res) {
    const bool first = json::parse(req.body)["messages"].size() == 2;
    res.set_content(chat_reply(first ? "not json" : kPlanJson), "application/json");
  });
  EXPECT_EQ(request_waypoints(small_bundle(), server.config()).size(), 1u);
  EXPECT_EQ(server.requests, 2);
}

TEST(Live, SchemaViolation) {
  FakeEndpoint server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_reply(R"({"waypoints": [{"position": {"x": 1}}]})"), "application/json");
  });
  EXPECT_EQ(error_code_of([&] { request_plan(small_bundle(), server.config()); }), ErrorCode::kSchema);
}

TEST(Live, MalformedEnvelope) {
  FakeEndpoint server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"result": "ok"})", "application/json");
  });
  EXPECT_EQ(error_code_of([&] { request_plan(small_bundle(), server.config()); }), ErrorCode::kInvalidResponse);
}

TEST(Live, HttpErrorIsNetworkFailure) {
  FakeEndpoint server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  EXPECT_EQ(error_code_of([&] { request_plan(small_bundle(), server.config()); }), ErrorCode::kNetwork);
}

TEST(Live, Timeout) {
  FakeEndpoint server([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(chat_reply(kPlanJson), "application/json");
  });
  EndpointConfig c = server.config();
  c.timeout_seconds = 0.3;
  EXPECT_EQ(error_code_of([&] { request_plan(small_bundle(), c); }), ErrorCode::kTimeout);
}

TEST(Live, ConnectionRefused) {
  // Reserve a free port and release it without ever listening.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
  socklen_t len = sizeof(addr);
  ASSERT_EQ(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len), 0);
  const int port = ntohs(addr.sin_port);
  ::close(fd);
  EndpointConfig c;
  c.base_url = "http://127.0.0.1:" + std::to_string(port);
  c.model = "m";
  c.timeout_seconds = 2.0;
  EXPECT_EQ(error_code_of([&] { request_plan(small_bundle(), c); }), ErrorCode::kNetwork);
}
