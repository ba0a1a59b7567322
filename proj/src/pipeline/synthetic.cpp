// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "usdrecon/error.hpp"
#include "usdrecon/scan_sim/procedural.hpp"

namespace usdrecon {

namespace {

using nlohmann::json;

constexpr std::int32_t kStatic = -1;

struct World {
  TriangleMesh mesh;
  std::vector<std::int32_t> owner;  // per triangle: placement index or kStatic
};

World build_world(const GroundTruthScene& scene, const AssetDatabase& db, double ground_z) {
  World w;
  const Aabb g = scene.bounds.inflated(5.0);
  TriangleMesh ground;
  ground.vertices = {{g.min.x(), g.min.y(), ground_z},
                     {g.max.x(), g.min.y(), ground_z},
                     {g.max.x(), g.max.y(), ground_z},
                     {g.min.x(), g.max.y(), ground_z}};
  ground.triangles = {{0, 1, 2}, {0, 2, 3}};
  append_mesh(w.mesh, ground);
  append_mesh(w.mesh, scene.clutter);
  w.owner.assign(w.mesh.triangles.size(), kStatic);
  for (std::size_t i = 0; i < scene.placements.size(); ++i) {
    const TriangleMesh placed = transform_mesh(db.mesh(scene.placements[i].asset_id),
                                               scene.placements[i].pose);
    append_mesh(w.mesh, placed);
    w.owner.resize(w.mesh.triangles.size(), static_cast<std::int32_t>(i));
  }
  return w;
}

// Every vertex of the placed mesh lands inside the image, in front of the camera.
bool fully_in_view(const TriangleMesh& mesh, const Pose& placement, const Pose& world_to_cam,
                   const CameraModel& camera) {
  for (const Vec3& v : mesh.vertices) {
    const auto px = camera.project(world_to_cam.apply(placement.apply(v)));
    if (!px || !camera.in_image(*px)) return false;
  }
  return true;
}

Polygon2 dilated_mask(const std::vector<Vec2>& pixels, double half_cell, const CameraModel& cam) {
  std::vector<Vec2> corners;
  corners.reserve(pixels.size() * 4);
  for (const Vec2& p : pixels) {
    for (const double du : {-half_cell, half_cell}) {
      for (const double dv : {-half_cell, half_cell}) {
        corners.emplace_back(std::clamp(p.x() + du, 0.0, static_cast<double>(cam.width)),
                             std::clamp(p.y() + dv, 0.0, static_cast<double>(cam.height)));
      }
    }
  }
  return convex_hull_2d(std::move(corners));
}

}  // namespace

SensorLog generate_scene_log(const GroundTruthScene& scene, const std::vector<Pose>& trajectory,
                             const LidarConfig& lidar, const AssetDatabase& db,
                             const LogOptions& options) {
  if (trajectory.empty()) throw Error(ErrorCode::kInvalidInput, "trajectory is empty");
  for (const GroundTruthPlacement& p : scene.placements) db.at(p.asset_id);
  options.camera.validate();
  if (options.pixel_step < 1) throw Error(ErrorCode::kInvalidInput, "pixel_step must be >= 1");

  const World world = build_world(scene, db, options.ground_z);
  const MeshBvh bvh(world.mesh);
  const std::vector<Vec3> dirs = lidar.directions();
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SensorLog log;
  log.camera = options.camera;
  const CameraModel& cam = options.camera;
  for (std::size_t f = 0; f < trajectory.size(); ++f) {
    const Pose& robot = trajectory[f];
    validate_pose(robot, 1e-6);
    SensorFrame frame;
    frame.timestamp = static_cast<double>(f) * options.frame_period;
    frame.robot_pose = robot;
    frame.cloud.frame = "world";

    const Vec3 lidar_origin = robot.apply(Vec3(0.0, 0.0, options.lidar_height));
    for (const Vec3& d : dirs) {
      if (auto hit = bvh.cast(lidar_origin, robot.rotation * d, lidar.max_range)) {
        frame.cloud.points.push_back(hit->point);
      }
    }

    // Camera visibility by nearest hit along a pixel grid of rays.
    const Pose cam_in_world = compose(robot, cam.extrinsic);
    const Pose world_to_cam = inverse(cam_in_world);
    std::vector<std::vector<Vec2>> visible(scene.placements.size());
    for (int v = options.pixel_step / 2; v < cam.height; v += options.pixel_step) {
      for (int u = options.pixel_step / 2; u < cam.width; u += options.pixel_step) {
        const Vec3 ray_cam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
        const Vec3 ray = cam_in_world.rotation * ray_cam.normalized();
        const auto hit = bvh.cast(cam_in_world.translation, ray, options.max_detection_range);
        if (!hit) continue;
        const std::int32_t who = world.owner[hit->triangle];
        if (who != kStatic) visible[static_cast<std::size_t>(who)].emplace_back(u, v);
      }
    }

    for (std::size_t i = 0; i < scene.placements.size(); ++i) {
      if (visible[i].size() < options.min_visible) continue;
      const GroundTruthPlacement& gp = scene.placements[i];
      if (options.require_full_view &&
          !fully_in_view(db.mesh(gp.asset_id), gp.pose, world_to_cam, cam)) {
        continue;
      }
      const AssetRecord& rec = db.at(gp.asset_id);
      Detection det;
      det.frame_id = f;
      det.label = rec.labels.empty() ? std::string() : rec.labels.front();
      det.confidence = std::min(1.0, static_cast<double>(visible[i].size()) / 200.0);
      det.mask = dilated_mask(visible[i], 0.5 * options.pixel_step + options.mask_dilation, cam);

      // Stored view nearest to the bearing of the camera in the asset frame.
      const Vec3 local = inverse(gp.pose).apply(cam_in_world.translation);
      const double bearing = std::atan2(local.y(), local.x());
      const auto views = static_cast<long>(rec.embeddings.size());
      long view = std::lround(bearing / (2.0 * std::numbers::pi / static_cast<double>(views)));
      view = ((view % views) + views) % views;
      det.embedding = rec.embeddings[static_cast<std::size_t>(view)];
      if (options.embedding_noise > 0.0) {
        for (double& x : det.embedding) x += options.embedding_noise * noise(rng);
      }
      frame.detections.push_back(std::move(det));
    }
    log.frames.push_back(std::move(frame));
  }
  return log;
}

std::vector<LabeledBox> ground_truth_boxes(const GroundTruthScene& scene, const AssetDatabase& db) {
  std::vector<LabeledBox> out;
  for (const GroundTruthPlacement& p : scene.placements) {
    const AssetRecord& rec = db.at(p.asset_id);
    out.push_back({rec.labels.empty() ? std::string() : rec.labels.front(),
                   transform_aabb(db.mesh_bounds(p.asset_id), p.pose)});
  }
  return out;
}

std::vector<Pose> orbit_trajectory(const Vec3& center, double radius, int n_frames) {
  if (n_frames < 1 || !(radius > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "orbit needs n_frames >= 1 and radius > 0");
  }
  std::vector<Pose> out;
  for (int k = 0; k < n_frames; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n_frames;
    const Vec3 pos(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a), center.z());
    out.push_back(Pose::from_yaw(a + std::numbers::pi, pos));
  }
  return out;
}

std::vector<Pose> scene_orbit(const GroundTruthScene& scene, const AssetDatabase& db, int n_frames,
                              double margin) {
  const auto boxes = ground_truth_boxes(scene, db);
  if (boxes.empty()) return orbit_trajectory(scene.bounds.center(), std::max(margin, 1.0), n_frames);
  Aabb all = boxes.front().box;
  for (const LabeledBox& b : boxes) {
    all.expand(b.box.min);
    all.expand(b.box.max);
  }
  const Vec3 c = all.center();
  const Vec3 e = all.extent();
  return orbit_trajectory(Vec3(c.x(), c.y(), 0.0), 0.5 * std::hypot(e.x(), e.y()) + margin, n_frames);
}

GroundTruthScene demo_scene(const AssetDatabase& db, std::size_t count, std::uint64_t seed,
                            double gap) {
  if (count > db.records().size()) {
    throw Error(ErrorCode::kInvalidInput, "scene asks for more assets than the database holds");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pick(db.records().size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  std::shuffle(pick.begin(), pick.end(), rng);
  pick.resize(count);
  std::sort(pick.begin(), pick.end());

  GroundTruthScene scene;
  if (count == 0) {
    scene.bounds = {Vec3(-3, -3, 0), Vec3(3, 3, 3)};
    return scene;
  }
  // Cell size from the widest footprint so any yaw keeps boxes `gap` apart.
  double cell = 0.0;
  for (std::size_t i : pick) {
    const Aabb b = db.mesh_bounds(db.records()[i].id);
    cell = std::max(cell, b.extent().head<2>().norm());
  }
  cell += gap;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
  const std::size_t rows = (count + cols - 1) / cols;
  std::uniform_real_distribution<double> yaw(-std::numbers::pi, std::numbers::pi);
  for (std::size_t k = 0; k < count; ++k) {
    const double x = (static_cast<double>(k % cols) - 0.5 * static_cast<double>(cols - 1)) * cell;
    const double y = (static_cast<double>(k / cols) - 0.5 * static_cast<double>(rows - 1)) * cell;
    scene.placements.push_back({db.records()[pick[k]].id, Pose::from_yaw(yaw(rng), Vec3(x, y, 0.0))});
  }
  Aabb box = transform_aabb(db.mesh_bounds(scene.placements.front().asset_id),
                            scene.placements.front().pose);
  for (const GroundTruthPlacement& p : scene.placements) {
    const Aabb b = transform_aabb(db.mesh_bounds(p.asset_id), p.pose);
    box.expand(b.min);
    box.expand(b.max);
  }
  scene.bounds = box.inflated(4.0);
  scene.bounds.min.z() = 0.0;
  return scene;
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruthScene& scene) {
  json placements = json::array();
  for (const GroundTruthPlacement& p : scene.placements) {
    const auto q = p.pose.quat_xyzw();
    placements.push_back(
        {{"asset_id", p.asset_id},
         {"pose",
          {{"xyz", {p.pose.translation.x(), p.pose.translation.y(), p.pose.translation.z()}},
           {"quat", {q[0], q[1], q[2], q[3]}}}}});
  }
  const json doc = {
      {"bounds",
       {{"min", {scene.bounds.min.x(), scene.bounds.min.y(), scene.bounds.min.z()}},
        {"max", {scene.bounds.max.x(), scene.bounds.max.y(), scene.bounds.max.z()}}}},
      {"placements", placements}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
  if (!scene.clutter.empty()) {
    write_obj(std::filesystem::path(path).replace_extension(".clutter.obj"), scene.clutter);
  }
}

GroundTruthScene read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  GroundTruthScene scene;
  try {
    const json doc = json::parse(in);
    const auto vec = [](const json& j) {
      const auto v = j.get<std::vector<double>>();
      if (v.size() != 3) throw Error(ErrorCode::kSchema, "expected [x, y, z]");
      return Vec3(v[0], v[1], v[2]);
    };
    scene.bounds = {vec(doc.at("bounds").at("min")), vec(doc.at("bounds").at("max"))};
    for (const json& p : doc.at("placements")) {
      const auto q = p.at("pose").at("quat").get<std::vector<double>>();
      if (q.size() != 4) throw Error(ErrorCode::kSchema, "quat needs 4 components");
      scene.placements.push_back({p.at("asset_id").get<std::string>(),
                                  Pose::from_xyzw(vec(p.at("pose").at("xyz")), {q[0], q[1], q[2], q[3]})});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
  }
  const auto clutter = std::filesystem::path(path).replace_extension(".clutter.obj");
  if (std::filesystem::exists(clutter)) scene.clutter = read_obj(clutter);
  return scene;
}

}  // namespace usdrecon
