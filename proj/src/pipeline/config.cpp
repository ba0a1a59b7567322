// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/pipeline/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "usdrecon/error.hpp"
#include "usdrecon/pipeline/toml_lite.hpp"

namespace usdrecon {

namespace {

[[noreturn]] void bad(const TomlEntry& e, const std::string& key, const char* want) {
  throw ParseError(e.line, e.column, "'" + key + "' must be " + want);
}

double as_double(const TomlEntry& e, const std::string& key) {
  if (const auto* d = std::get_if<double>(&e.value)) return *d;
  if (const auto* i = std::get_if<long long>(&e.value)) return static_cast<double>(*i);
  bad(e, key, "a number");
}

long long as_int(const TomlEntry& e, const std::string& key) {
  if (const auto* i = std::get_if<long long>(&e.value)) return *i;
  bad(e, key, "an integer");
}

std::size_t as_count(const TomlEntry& e, const std::string& key) {
  const long long v = as_int(e, key);
  if (v < 0) bad(e, key, "a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool as_bool(const TomlEntry& e, const std::string& key) {
  if (const auto* b = std::get_if<bool>(&e.value)) return *b;
  bad(e, key, "a boolean");
}

std::string as_string(const TomlEntry& e, const std::string& key) {
  if (const auto* s = std::get_if<std::string>(&e.value)) return *s;
  bad(e, key, "a string");
}

using Setter = std::function<void(PipelineConfig&, const TomlEntry&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [&](const char* k, double PipelineConfig::*m) {
      t[k] = [m](PipelineConfig& c, const TomlEntry& e, const std::string& key) { c.*m = as_double(e, key); };
    };
    auto integer = [&](const char* k, int PipelineConfig::*m) {
      t[k] = [m](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
        c.*m = static_cast<int>(as_int(e, key));
      };
    };
    auto count = [&](const char* k, std::size_t PipelineConfig::*m) {
      t[k] = [m](PipelineConfig& c, const TomlEntry& e, const std::string& key) { c.*m = as_count(e, key); };
    };
    num("pipeline.nms_radius", &PipelineConfig::nms_radius);
    num("pipeline.voxel_size", &PipelineConfig::voxel_size);
    num("pipeline.world_voxel", &PipelineConfig::world_voxel);
    integer("pipeline.reconcile_every", &PipelineConfig::reconcile_every);
    integer("pipeline.snapshot_every", &PipelineConfig::snapshot_every);
    num("pipeline.ground_z", &PipelineConfig::ground_z);
    num("pipeline.ground_clearance", &PipelineConfig::ground_clearance);
    num("pipeline.cluster_radius", &PipelineConfig::cluster_radius);
    count("pipeline.min_cluster_points", &PipelineConfig::min_cluster_points);
    count("pipeline.max_segments", &PipelineConfig::max_segments);
    num("pipeline.min_mask_agreement", &PipelineConfig::min_mask_agreement);
    integer("pipeline.settle_passes", &PipelineConfig::settle_passes);
    count("pipeline.workers", &PipelineConfig::workers);
    num("pipeline.max_registration_rms", &PipelineConfig::max_registration_rms);
    t["pipeline.refine_survivors"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.refine_survivors = as_bool(e, key);
    };
    num("pipeline.refine_margin", &PipelineConfig::refine_margin);
    num("pipeline.refine_rejection", &PipelineConfig::refine_rejection);
    t["pipeline.label_map"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.label_map = as_string(e, key);
    };

    count("retrieval.k", &PipelineConfig::retrieval_k);
    num("retrieval.threshold", &PipelineConfig::retrieval_threshold);

    t["coarse.yaw_steps"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.coarse.yaw_steps = static_cast<int>(as_int(e, key));
    };
    t["coarse.max_points"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.coarse.max_points = as_count(e, key);
    };
    t["coarse.min_points"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.coarse.min_points = as_count(e, key);
    };
    t["coarse.inlier_distance"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.coarse.inlier_distance = as_double(e, key);
    };
    integer("coarse.candidates", &PipelineConfig::coarse_candidates);

    t["icp.max_iterations"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.icp.max_iterations = static_cast<int>(as_int(e, key));
    };
    t["icp.tolerance"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.icp.tolerance = as_double(e, key);
    };
    t["icp.rejection_distance"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.icp.rejection_distance = as_double(e, key);
    };
    t["icp.scale_search"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.icp.scale_search = as_bool(e, key);
    };
    t["icp.yaw_only"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.icp.yaw_only = as_bool(e, key);
    };

    t["score.distribution_weight"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.weights.distribution = as_double(e, key);
    };
    t["score.hull_tolerance"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.score_hull_tolerance = as_double(e, key);
    };
    t["score.density_weight"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.weights.density = as_double(e, key);
    };

    t["endpoint.base_url"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.base_url = as_string(e, key);
    };
    t["endpoint.path"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.path = as_string(e, key);
    };
    t["endpoint.model"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.model = as_string(e, key);
    };
    t["endpoint.api_key_env"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.api_key_env = as_string(e, key);
    };
    t["endpoint.timeout_seconds"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.timeout_seconds = as_double(e, key);
    };
    t["endpoint.mock"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.mock = as_bool(e, key);
    };
    t["endpoint.seed"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.seed = as_count(e, key);
    };
    t["endpoint.standoff"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.mock_standoff = as_double(e, key);
    };
    t["endpoint.clearance"] = [](PipelineConfig& c, const TomlEntry& e, const std::string& key) {
      c.endpoint.clearance = as_double(e, key);
    };
    return t;
  }();
  return table;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidInput, std::string("config: ") + field + " " + what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void PipelineConfig::validate() const {
  require(positive(nms_radius), "nms_radius", "must be positive");
  require(positive(voxel_size), "voxel_size", "must be positive");
  require(positive(world_voxel), "world_voxel", "must be positive");
  require(reconcile_every >= 0, "reconcile_every", "must be >= 0");
  require(snapshot_every >= 0, "snapshot_every", "must be >= 0");
  require(retrieval_k >= 1, "retrieval.k", "must be >= 1");
  require(std::isfinite(retrieval_threshold) && retrieval_threshold >= -1.0 && retrieval_threshold <= 1.0,
          "retrieval.threshold", "must lie in [-1, 1]");
  require(coarse.yaw_steps >= 1, "coarse.yaw_steps", "must be >= 1");
  require(coarse.max_points >= 1, "coarse.max_points", "must be >= 1");
  require(positive(coarse.inlier_distance), "coarse.inlier_distance", "must be positive");
  require(coarse_candidates >= 1, "coarse.candidates", "must be >= 1");
  require(icp.max_iterations >= 1, "icp.max_iterations", "must be >= 1");
  require(std::isfinite(icp.tolerance) && icp.tolerance >= 0.0, "icp.tolerance", "must be >= 0");
  require(positive(icp.rejection_distance), "icp.rejection_distance", "must be positive");
  require(positive(max_registration_rms), "max_registration_rms", "must be positive");
  require(std::isfinite(weights.distribution) && weights.distribution >= 0.0, "score.distribution_weight",
          "must be >= 0");
  require(std::isfinite(weights.density) && weights.density >= 0.0, "score.density_weight", "must be >= 0");
  require(std::isfinite(score_hull_tolerance) && score_hull_tolerance >= 0.0, "score.hull_tolerance",
          "must be >= 0");
  require(std::isfinite(refine_margin) && refine_margin >= 0.0, "refine_margin", "must be >= 0");
  require(positive(refine_rejection), "refine_rejection", "must be positive");
  require(std::isfinite(ground_z), "ground_z", "must be finite");
  require(std::isfinite(ground_clearance) && ground_clearance >= 0.0, "ground_clearance", "must be >= 0");
  require(positive(cluster_radius), "cluster_radius", "must be positive");
  require(min_cluster_points >= 1, "min_cluster_points", "must be >= 1");
  require(max_segments >= 1, "max_segments", "must be >= 1");
  require(std::isfinite(min_mask_agreement) && min_mask_agreement >= 0.0 && min_mask_agreement <= 1.0,
          "min_mask_agreement", "must lie in [0, 1]");
  require(settle_passes >= 1, "settle_passes", "must be >= 1");
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig config;
  for (const auto& [key, entry] : parse_toml_subset(text)) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(entry.line, entry.column, "unknown config key '" + key + "'");
    it->second(config, entry, key);
  }
  config.validate();
  return config;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  PipelineConfig config = parse_pipeline_config(ss.str());
  if (config.label_map && config.label_map->is_relative()) {
    config.label_map = path.parent_path() / *config.label_map;
  }
  return config;
}

}  // namespace usdrecon
