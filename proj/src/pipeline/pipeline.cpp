// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <atomic>
#include <functional>
#include <numbers>
#include <numeric>
#include <thread>

#include "usdrecon/error.hpp"
#include "usdrecon/geometry/voxel.hpp"
#include "usdrecon/registration/camera.hpp"
#include "usdrecon/retrieval/labels.hpp"
#include "usdrecon/usd/usda.hpp"

namespace usdrecon {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string frame_name(std::size_t frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%06zu.usda", frame);
  return buf;
}

ScoreOptions score_options(const PipelineConfig& config) {
  ScoreOptions opts;
  opts.voxel_size = config.voxel_size;
  opts.hull_tolerance = config.score_hull_tolerance;
  return opts;
}

void rescore(SceneState& scene, const NeighborIndex& index, const PipelineConfig& config) {
  const ScoreOptions opts = score_options(config);
  for (PlacedAsset& p : scene.placed) {
    p.scores = score_placement(p, index, opts);
    p.combined = combined_score(p.scores, config.weights);
  }
}

void drop_unsupported(SceneState& scene) {
  std::erase_if(scene.placed, [](const PlacedAsset& p) { return !p.scores.has_support(); });
}

// Refits a placement to the world points inside its (slightly grown) box.
// Keeps the old pose when there is too little data or ICP fails.
void refine_placement(PlacedAsset& p, const NeighborIndex& index, const PointCloud& asset_cloud,
                      const PipelineConfig& config) {
  PointCloud target;
  target.frame = "world";
  const double floor = config.ground_z + config.ground_clearance;
  for (std::size_t i : index.box_search(world_bounds(p).inflated(config.refine_margin))) {
    const Vec3 q = index.point(i);
    if (q.z() >= floor) target.points.push_back(q);
  }
  if (target.size() < config.min_cluster_points) return;
  IcpOptions icp = config.icp;
  icp.rejection_distance = config.refine_rejection;
  // Also try the half-turn about the asset's vertical axis: near-symmetric
  // furniture seen from one side often registers the wrong way round, and
  // the accumulated cloud may hold the detail that tells them apart.
  std::optional<IcpResult> best;
  for (const Pose& init : {p.pose, compose(p.pose, Pose::from_yaw(std::numbers::pi))}) {
    try {
      IcpResult fit = icp_refine(asset_cloud, target, init, icp);
      if (!best || fit.rms < best->rms) best = std::move(fit);
    } catch (const DivergenceError&) {
    }
  }
  if (!best || best->rms > config.max_registration_rms) return;
  p.pose = best->pose;
  p.registered_cloud = transform_cloud(asset_cloud, best->pose);
  p.registered_cloud.frame = "world";
}

struct Job {
  std::size_t detection;
  PlacedAsset placement;
  DetectionOutcome outcome;
};

void process_detection(Job& job, const SensorLog& log, std::size_t frame_index,
                       const PointCloud& world, const AssetDatabase& db,
                       const LabelCanonicalizer& labels, const PipelineConfig& config) {
  const SensorFrame& frame = log.frames[frame_index];
  const Detection& det = frame.detections[job.detection];
  DetectionOutcome& out = job.outcome;
  out.frame = frame_index;
  out.detection = job.detection;
  out.label = labels.canonical(det.label);
  try {
    validate_detection(det, log.camera);
    const auto hits = query_similar(db.index(), det.embedding, std::string_view(out.label),
                                    config.retrieval_k);
    if (hits.empty() || hits.front().score < config.retrieval_threshold) {
      out.reason = "no asset above retrieval threshold";
      return;
    }
    const PointCloud masked = extract_masked_points(world, log.camera, frame.robot_pose, det.mask);
    const Vec3 viewer = inverse(log.camera.world_to_camera(frame.robot_pose)).translation;
    const std::vector<PointCloud> segments = segment_candidates(masked, viewer, config);
    if (segments.empty()) {
      out.reason = "no object cluster inside the mask";
      return;
    }

    // Clusters nearest the camera first: an occluder in front of the object
    // also falls inside the mask, but an asset fitted to it spills out of the
    // mask when projected back.
    struct Fit {
      IcpResult icp;
      std::string asset_id;
      std::size_t segment;
    };
    std::optional<Fit> accepted;
    std::optional<Fit> closest;  // best rejected fit, for the report
    double closest_agreement = 0.0;
    const std::size_t n_segments = std::min(segments.size(), config.max_segments);
    for (std::size_t si = 0; si < n_segments && !accepted; ++si) {
      std::optional<Fit> best;
      for (const QueryResult& hit : hits) {
        if (hit.score < config.retrieval_threshold) break;
        try {
          IcpResult fit = register_asset(db.sim_cloud(hit.asset_id), segments[si], config);
          if (!best || fit.rms < best->icp.rms) best = Fit{std::move(fit), hit.asset_id, si};
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kDivergence && e.code() != ErrorCode::kInsufficientData) throw;
        }
      }
      if (!best) continue;
      const double agreement =
          mask_agreement(transform_cloud(db.sim_cloud(best->asset_id), best->icp.pose), log.camera,
                         frame.robot_pose, det.mask);
      if (best->icp.rms <= config.max_registration_rms && agreement >= config.min_mask_agreement) {
        accepted = std::move(best);
      } else if (!closest || best->icp.rms < closest->icp.rms) {
        closest_agreement = agreement;
        closest = std::move(best);
      }
    }
    const Fit* report = accepted ? &*accepted : closest ? &*closest : nullptr;
    if (!report) {
      out.reason = "registration failed on every cluster";
      return;
    }
    out.asset_id = report->asset_id;
    out.rms = report->icp.rms;
    out.inlier_fraction = report->icp.inlier_fraction;
    out.pose = report->icp.pose;
    out.target_points = segments[report->segment].size();
    if (!accepted) {
      out.reason = report->icp.rms > config.max_registration_rms
                       ? "registration rms above limit"
                       : "fit disagrees with the mask (" + std::to_string(closest_agreement) + ")";
      return;
    }
    const PointCloud& target = segments[accepted->segment];
    const IcpResult* best = &accepted->icp;
    PlacedAsset& p = job.placement;
    p.asset_id = out.asset_id;
    p.label = out.label;
    p.pose = best->pose;
    p.registered_cloud = transform_cloud(db.sim_cloud(out.asset_id), best->pose);
    p.registered_cloud.frame = "world";
    p.supporting_points = target;
    p.created_at = frame_index;
    p.local_bounds = db.mesh_bounds(out.asset_id);
    out.placed = true;
  } catch (const Error& e) {
    out.reason = std::string(to_string(e.code())) + ": " + e.what();
  }
}

void run_jobs(std::vector<Job>& jobs, std::size_t workers,
              const std::function<void(Job&)>& fn) {
  if (workers <= 1 || jobs.size() <= 1) {
    for (Job& j : jobs) fn(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t n = std::min(workers, jobs.size());
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) fn(jobs[i]);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

std::vector<std::vector<std::size_t>> euclidean_clusters(const PointCloud& cloud, double radius) {
  std::vector<std::vector<std::size_t>> clusters;
  if (cloud.empty()) return clusters;
  const NeighborIndex index(cloud);
  std::vector<bool> seen(cloud.size(), false);
  for (std::size_t seed = 0; seed < cloud.size(); ++seed) {
    if (seen[seed]) continue;
    std::vector<std::size_t> members{seed};
    seen[seed] = true;
    for (std::size_t head = 0; head < members.size(); ++head) {
      for (std::size_t n : index.radius_search(cloud.points[members[head]], radius)) {
        if (!seen[n]) {
          seen[n] = true;
          members.push_back(n);
        }
      }
    }
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  return clusters;
}

std::vector<PointCloud> segment_candidates(const PointCloud& masked, const Vec3& viewer,
                                           const PipelineConfig& config) {
  PointCloud above;
  above.frame = masked.frame;
  const double floor = config.ground_z + config.ground_clearance;
  for (const Vec3& p : masked.points) {
    if (p.z() >= floor) above.points.push_back(p);
  }
  std::vector<std::pair<double, PointCloud>> ranked;
  for (const auto& members : euclidean_clusters(above, config.cluster_radius)) {
    if (members.size() < config.min_cluster_points) continue;
    std::vector<double> d;
    d.reserve(members.size());
    PointCloud c;
    c.frame = masked.frame;
    for (std::size_t i : members) {
      d.push_back((above.points[i] - viewer).norm());
      c.points.push_back(above.points[i]);
    }
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    ranked.emplace_back(d[d.size() / 2], std::move(c));
  }
  // Stable: equal depths keep cluster order (smallest point index first).
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<PointCloud> out;
  for (auto& r : ranked) out.push_back(std::move(r.second));
  return out;
}

PointCloud segment_target(const PointCloud& masked, const Vec3& viewer, const PipelineConfig& config) {
  std::vector<PointCloud> c = segment_candidates(masked, viewer, config);
  if (c.empty()) return PointCloud{{}, masked.frame};
  return std::move(c.front());
}

double mask_agreement(const PointCloud& cloud, const CameraModel& camera, const Pose& robot_pose,
                      const Polygon2& mask) {
  if (cloud.empty()) return 0.0;
  return static_cast<double>(masked_point_indices(cloud, camera, robot_pose, mask).size()) /
         static_cast<double>(cloud.size());
}

IcpResult register_asset(const PointCloud& asset_cloud, const PointCloud& target,
                         const PipelineConfig& config) {
  const std::vector<RegistrationResult> coarse = coarse_candidates(asset_cloud, target, config.coarse);
  std::optional<IcpResult> best;
  std::optional<Error> last_error;
  const std::size_t n = std::min<std::size_t>(coarse.size(), static_cast<std::size_t>(config.coarse_candidates));
  for (std::size_t i = 0; i < n; ++i) {
    try {
      IcpResult r = icp_refine(asset_cloud, target, coarse[i].pose, config.icp);
      if (!best || r.rms < best->rms) best = std::move(r);
    } catch (const DivergenceError& e) {
      last_error = e;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kDivergence,
                last_error ? last_error->what() : "no registration hypothesis converged");
  }
  return *best;
}

void reconcile_scene(SceneState& scene, const PointCloud& world, const PipelineConfig& config,
                     const AssetDatabase* db) {
  if (scene.placed.empty()) return;
  const NeighborIndex index(world);
  rescore(scene, index, config);
  drop_unsupported(scene);
  const auto clusters = cluster_nms(scene.placed, config.nms_radius);
  SceneState kept = select_representatives(scene, clusters);
  if (db && config.refine_survivors) {
    for (PlacedAsset& p : kept.placed) refine_placement(p, index, db->sim_cloud(p.asset_id), config);
  }
  kept = settle_scene(kept, config.ground_z, config.settle_passes);
  rescore(kept, index, config);
  drop_unsupported(kept);
  scene = std::move(kept);
}

PipelineResult run_pipeline(const SensorLog& log, const AssetDatabase& db,
                            const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  log.camera.validate();
  const auto start = std::chrono::steady_clock::now();
  const LabelCanonicalizer labels =
      config.label_map ? LabelCanonicalizer::from_json_file(*config.label_map) : LabelCanonicalizer();
  const AssetPathResolver resolver = [&db](const std::string& id) { return db.asset_path(id); };
  if (out_dir) std::filesystem::create_directories(*out_dir);
  const std::size_t workers =
      config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;

  PipelineResult result;
  VoxelAccumulator world(config.world_voxel);
  std::uint64_t next_id = 1;
  bool dirty = false;

  auto snapshot = [&](const std::string& name) {
    if (!out_dir) return;
    const std::filesystem::path path = *out_dir / name;
    write_text(path, emit_usda(result.scene, resolver));
    result.snapshots.push_back(path);
  };
  auto reconcile = [&] {
    reconcile_scene(result.scene, world.cloud(), config, &db);
    ++result.reconciliations;
    dirty = false;
  };

  for (std::size_t f = 0; f < log.frames.size(); ++f) {
    const SensorFrame& frame = log.frames[f];
    world.insert(frame.cloud);
    result.world_cloud_sizes.push_back(world.cloud().size());
    result.scene.frame = f;

    std::vector<Job> jobs(frame.detections.size());
    for (std::size_t d = 0; d < jobs.size(); ++d) jobs[d].detection = d;
    run_jobs(jobs, workers, [&](Job& j) {
      process_detection(j, log, f, world.cloud(), db, labels, config);
    });

    std::optional<NeighborIndex> index;
    for (Job& j : jobs) {
      if (j.outcome.placed) {
        if (!index) index.emplace(world.cloud());
        PlacedAsset& p = j.placement;
        p.scores = score_placement(p, *index, score_options(config));
        p.combined = combined_score(p.scores, config.weights);
        if (!p.scores.has_support()) {
          j.outcome.placed = false;
          j.outcome.reason = "no scene points inside the placed hull";
        } else {
          p.instance_id = next_id++;
          result.scene.placed.push_back(std::move(p));
          ++result.placements_inserted;
          dirty = true;
        }
      }
      result.outcomes.push_back(std::move(j.outcome));
    }

    const std::size_t count = f + 1;
    if (config.reconcile_every > 0 && count % static_cast<std::size_t>(config.reconcile_every) == 0 && dirty) {
      reconcile();
    }
    if (config.snapshot_every > 0 && count % static_cast<std::size_t>(config.snapshot_every) == 0) {
      snapshot(frame_name(f));
    }
  }

  if (dirty) reconcile();
  if (!result.scene.placed.empty()) {
    Aabb box = world_bounds(result.scene.placed.front());
    for (const PlacedAsset& p : result.scene.placed) {
      const Aabb b = world_bounds(p);
      box.expand(b.min);
      box.expand(b.max);
    }
    result.scene.bounds = box;
  }
  result.scene.world_cloud = std::make_shared<const PointCloud>(world.cloud());
  snapshot("scene_final.usda");
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out_dir) write_text(*out_dir / "report.json", pipeline_report_json(result));
  return result;
}

PipelineResult run_pipeline(const std::filesystem::path& log_dir, const AssetDatabase& db,
                            const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& out_dir) {
  return run_pipeline(read_sensor_log(log_dir), db, config, out_dir);
}

std::string pipeline_report_json(const PipelineResult& result) {
  json doc;
  doc["frames"] = result.world_cloud_sizes.size();
  doc["world_points"] = result.world_cloud_sizes.empty() ? 0 : result.world_cloud_sizes.back();
  doc["placements_inserted"] = result.placements_inserted;
  doc["reconciliations"] = result.reconciliations;
  doc["settle_warning"] = result.scene.settle_warning;
  json objects = json::array();
  for (const PlacedAsset& p : result.scene.placed) {
    const Vec3 c = world_bounds(p).center();
    objects.push_back({{"instance_id", p.instance_id},
                       {"asset_id", p.asset_id},
                       {"label", p.label},
                       {"created_at", p.created_at},
                       {"combined", p.combined},
                       {"centroid", {c.x(), c.y(), c.z()}}});
  }
  doc["objects"] = std::move(objects);
  json dets = json::array();
  for (const DetectionOutcome& o : result.outcomes) {
    json d = {{"frame", o.frame}, {"detection", o.detection}, {"label", o.label},
              {"placed", o.placed}, {"target_points", o.target_points}};
    if (!o.asset_id.empty()) d["asset_id"] = o.asset_id;
    if (o.rms > 0.0) d["rms"] = o.rms;
    if (!o.reason.empty()) d["reason"] = o.reason;
    dets.push_back(std::move(d));
  }
  doc["detections"] = std::move(dets);
  // Timing is left out so reports from identical inputs compare equal.
  return doc.dump(2) + "\n";
}

}  // namespace usdrecon
