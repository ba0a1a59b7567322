// SPDX-License-Identifier: Apache-2.0
// Command-line front end: build-db, demo-data, simulate, run, evaluate, plan,
// export-viz.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "usdrecon/error.hpp"
#include "usdrecon/evaluation/metrics.hpp"
#include "usdrecon/evaluation/svg.hpp"
#include "usdrecon/pipeline/asset_db.hpp"
#include "usdrecon/pipeline/config.hpp"
#include "usdrecon/pipeline/pipeline.hpp"
#include "usdrecon/pipeline/synthetic.hpp"
#include "usdrecon/prompting/prompting.hpp"
#include "usdrecon/simd/kernels.hpp"
#include "usdrecon/usd/usda.hpp"

namespace fs = std::filesystem;
using namespace usdrecon;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

SceneState load_scene(const fs::path& usda) { return scene_from_stage(parse_usda(read_file(usda))); }

// Predictions come either from a USDA scene or from a boxes JSON file.
std::vector<LabeledBox> load_boxes(const fs::path& path) {
  if (path.extension() == ".usda") return boxes_from_scene(load_scene(path));
  return read_boxes(path);
}

PipelineConfig load_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_pipeline_config(path);
}

struct Common {
  int viewpoints = 4;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruct USDA scenes from robot sensor logs"};
  app.require_subcommand(1);
  Common common;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");
  app.add_option("--viewpoints", common.viewpoints, "Simulated LiDAR viewpoints per asset")
      ->check(CLI::Range(1, 64));

  // build-db
  auto* build_db = app.add_subcommand("build-db", "Load a manifest and fill the simulated-cloud cache");
  std::string manifest;
  build_db->add_option("manifest", manifest, "assets.json")->required()->check(CLI::ExistingFile);

  // demo-data
  auto* demo = app.add_subcommand("demo-data", "Write the procedural demo asset database");
  std::string demo_dir;
  DemoDatabaseOptions demo_opts;
  demo->add_option("dir", demo_dir, "Output directory")->required();
  demo->add_option("--dim", demo_opts.embedding_dim, "Embedding dimension");
  demo->add_option("--seed", demo_opts.seed, "Embedding seed");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a sensor log from a ground-truth scene");
  std::string sim_manifest, sim_out, sim_scene;
  std::size_t sim_objects = 6;
  std::uint64_t sim_seed = 7;
  int sim_frames = 20;
  double sim_radius = 0.0;
  simulate->add_option("--db", sim_manifest, "assets.json")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "Log directory")->required();
  simulate->add_option("--scene", sim_scene, "Ground-truth scene JSON (default: random demo scene)");
  simulate->add_option("--objects", sim_objects, "Objects in a random demo scene");
  simulate->add_option("--seed", sim_seed, "Scene seed");
  simulate->add_option("--frames", sim_frames, "Frames on the orbit")->check(CLI::PositiveNumber);
  simulate->add_option("--radius", sim_radius, "Orbit radius in meters (default: fit the scene)");

  // run
  auto* run = app.add_subcommand("run", "Reconstruct a scene from a sensor log");
  std::string run_manifest, run_log, run_out, run_config;
  run->add_option("--db", run_manifest, "assets.json")->required()->check(CLI::ExistingFile);
  run->add_option("--log", run_log, "Log directory")->required()->check(CLI::ExistingDirectory);
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--config", run_config, "Pipeline config (TOML)")->check(CLI::ExistingFile);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predicted boxes against ground truth");
  std::string eval_pred, eval_gt, eval_json;
  bool eval_matched = false;
  evaluate->add_option("--pred", eval_pred, "Scene .usda or boxes .json")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--gt", eval_gt, "Ground-truth boxes .json")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--json", eval_json, "Also write the report as JSON");
  evaluate->add_flag("--miou-over-matched", eval_matched, "Average IoU over matched pairs only");

  // plan
  auto* plan = app.add_subcommand("plan", "Ask a planner for waypoints and validate them");
  std::string plan_scene, plan_task, plan_config, plan_out, plan_base_url, plan_model;
  bool plan_mock = false, plan_reorder = false;
  plan->add_option("--scene", plan_scene, "Scene .usda")->required()->check(CLI::ExistingFile);
  plan->add_option("--task", plan_task, "Task text")->required();
  plan->add_option("--config", plan_config, "Config with an [endpoint] section")->check(CLI::ExistingFile);
  plan->add_option("--base-url", plan_base_url, "Chat endpoint base URL");
  plan->add_option("--model", plan_model, "Model name");
  plan->add_flag("--mock", plan_mock, "Use the offline planner");
  plan->add_flag("--reorder", plan_reorder, "Reorder waypoints by nearest neighbour");
  plan->add_option("--out", plan_out, "Write waypoints JSON here");

  // export-viz
  auto* viz = app.add_subcommand("export-viz", "Top-down SVG of predicted and ground-truth boxes");
  std::string viz_pred, viz_gt, viz_waypoints, viz_out;
  SvgOptions svg_opts;
  viz->add_option("--pred", viz_pred, "Scene .usda or boxes .json")->required()->check(CLI::ExistingFile);
  viz->add_option("--gt", viz_gt, "Ground-truth boxes .json")->check(CLI::ExistingFile);
  viz->add_option("--waypoints", viz_waypoints, "Waypoints JSON")->check(CLI::ExistingFile);
  viz->add_option("--scale", svg_opts.pixels_per_meter, "Pixels per meter");
  viz->add_option("--out", viz_out, "Output .svg")->required();

  // misc
  auto* info = app.add_subcommand("info", "Print build and CPU dispatch information");

  CLI11_PARSE(app, argc, argv);
  auto say = [&](const std::string& s) {
    if (!quiet) std::cout << s << '\n';
  };

  try {
    AssetDbOptions db_opts;
    db_opts.n_viewpoints = common.viewpoints;

    if (*build_db) {
      const AssetDatabase db = build_asset_db(manifest, LidarConfig{}, db_opts);
      say("assets: " + std::to_string(db.records().size()) + ", views indexed: " +
          std::to_string(db.index().size()) + ", simulated: " + std::to_string(db.simulations()) +
          ", cache hits: " + std::to_string(db.cache_hits()));
    } else if (*demo) {
      const fs::path m = write_demo_database(demo_dir, demo_opts);
      say("wrote " + m.string());
    } else if (*simulate) {
      AssetDbOptions opts = db_opts;
      opts.precompute = false;
      const AssetDatabase db = build_asset_db(sim_manifest, LidarConfig{}, opts);
      const GroundTruthScene scene =
          sim_scene.empty() ? demo_scene(db, sim_objects, sim_seed) : read_ground_truth(sim_scene);
      const auto trajectory = sim_radius > 0.0
                                  ? orbit_trajectory(scene.bounds.center().cwiseProduct(Vec3(1, 1, 0)),
                                                     sim_radius, sim_frames)
                                  : scene_orbit(scene, db, sim_frames);
      LogOptions log_opts;
      log_opts.seed = sim_seed;
      const SensorLog log = generate_scene_log(scene, trajectory, LidarConfig{}, db, log_opts);
      write_sensor_log(sim_out, log);
      write_ground_truth(fs::path(sim_out) / "ground_truth.json", scene);
      write_boxes(fs::path(sim_out) / "gt_boxes.json", ground_truth_boxes(scene, db));
      std::size_t dets = 0;
      for (const auto& f : log.frames) dets += f.detections.size();
      say("frames: " + std::to_string(log.frames.size()) + ", detections: " + std::to_string(dets) +
          ", objects: " + std::to_string(scene.placements.size()));
    } else if (*run) {
      const PipelineConfig config = load_config(run_config);
      const AssetDatabase db = build_asset_db(run_manifest, LidarConfig{}, db_opts);
      const PipelineResult r = run_pipeline(fs::path(run_log), db, config, fs::path(run_out));
      std::size_t skipped = 0;
      for (const auto& o : r.outcomes) skipped += o.placed ? 0 : 1;
      char buf[160];
      std::snprintf(buf, sizeof buf, "objects: %zu, placements inserted: %zu, skipped detections: %zu, %.2f s",
                    r.scene.placed.size(), r.placements_inserted, skipped, r.seconds);
      say(buf);
      write_boxes(fs::path(run_out) / "pred_boxes.json", boxes_from_scene(r.scene));
    } else if (*evaluate) {
      ReportOptions opts;
      opts.miou_over_matched = eval_matched;
      const auto report = per_class_report(load_boxes(eval_pred), read_boxes(eval_gt), opts);
      std::cout << report_to_table(report);
      if (!eval_json.empty()) write_file(eval_json, report_to_json(report));
    } else if (*plan) {
      const std::string usda = read_file(plan_scene);
      PipelineConfig config = load_config(plan_config);
      EndpointConfig endpoint = config.endpoint;
      if (plan_mock) endpoint.mock = true;
      if (!plan_base_url.empty()) endpoint.base_url = plan_base_url;
      if (!plan_model.empty()) endpoint.model = plan_model;
      const PromptBundle bundle = build_prompt(usda, plan_task);
      WaypointPlan wp = request_plan(bundle, endpoint);
      if (plan_reorder) wp.waypoints = reorder_nearest_neighbor(wp.waypoints);
      const SceneState scene = scene_from_stage(parse_usda(usda));
      const PlanReport report =
          validate_waypoints(wp.waypoints, scene, default_plan_bounds(scene), endpoint.clearance);
      const std::string text = waypoints_to_json(wp);
      if (plan_out.empty()) {
        std::cout << text;
      } else {
        write_file(plan_out, text);
      }
      char buf[128];
      std::snprintf(buf, sizeof buf, "waypoints: %zu, violations: %zu, path length: %.2f m",
                    wp.waypoints.size(), report.violations.size(), report.path_length);
      std::cerr << buf << '\n';
      for (const auto& v : report.violations) {
        std::cerr << "  waypoint " << v.index << ": " << v.reason << '\n';
      }
      return report.violations.empty() ? 0 : 3;
    } else if (*viz) {
      const auto pred = load_boxes(viz_pred);
      const auto gt = viz_gt.empty() ? std::vector<LabeledBox>{} : read_boxes(viz_gt);
      const auto wps = viz_waypoints.empty() ? std::vector<Waypoint>{}
                                             : parse_waypoint_plan(read_file(viz_waypoints)).waypoints;
      write_file(viz_out, boxes_to_svg(pred, gt, wps, svg_opts));
      say("wrote " + viz_out);
    } else if (*info) {
      std::cout << "simd: " << simd::to_string(simd::active_isa()) << '\n';
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
