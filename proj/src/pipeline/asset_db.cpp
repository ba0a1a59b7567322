// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/pipeline/asset_db.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <random>

#include "usdrecon/error.hpp"
#include "usdrecon/geometry/ply_io.hpp"
#include "usdrecon/retrieval/manifest.hpp"
#include "usdrecon/scan_sim/procedural.hpp"

namespace usdrecon {

namespace {

// FNV-1a over the settings that change a simulated cloud.
std::string lidar_tag(const LidarConfig& c, int n_viewpoints) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d|%d|%.17g|%.17g|%.17g|%d", c.azimuth_steps,
                c.elevation_steps, c.elevation_min, c.elevation_max, c.max_range, n_viewpoints);
  std::uint64_t h = 1469598103934665603ULL;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ULL;
  }
  std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(h & 0xffffffffULL));
  return buf;
}

}  // namespace

AssetDatabase::AssetDatabase(std::vector<AssetRecord> records, LidarConfig lidar,
                             int n_viewpoints, std::filesystem::path cache_dir)
    : records_(std::move(records)),
      lidar_(lidar),
      n_viewpoints_(n_viewpoints),
      cache_dir_(std::move(cache_dir)) {
  lidar_.validate();
  if (n_viewpoints_ < 1) throw Error(ErrorCode::kInvalidInput, "n_viewpoints must be >= 1");
  index_ = build_index(records_);  // duplicate ids and bad embeddings fail here
  for (std::size_t i = 0; i < records_.size(); ++i) by_id_[records_[i].id] = i;
}

AssetDatabase::AssetDatabase(AssetDatabase&&) noexcept = default;
AssetDatabase& AssetDatabase::operator=(AssetDatabase&&) noexcept = default;

const AssetRecord* AssetDatabase::find(const std::string& asset_id) const {
  const auto it = by_id_.find(asset_id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const AssetRecord& AssetDatabase::at(const std::string& asset_id) const {
  const AssetRecord* r = find(asset_id);
  if (!r) throw Error(ErrorCode::kMissingAsset, "unknown asset '" + asset_id + "'");
  return *r;
}

const TriangleMesh& AssetDatabase::mesh(const std::string& asset_id) const {
  const AssetRecord& rec = at(asset_id);
  std::lock_guard<std::mutex> lock(*mutex_);
  auto& slot = meshes_[asset_id];
  if (!slot) {
    auto mesh = std::make_shared<TriangleMesh>(read_obj(rec.mesh_path));
    mesh->validate();
    slot = std::move(mesh);
  }
  return *slot;
}

Aabb AssetDatabase::mesh_bounds(const std::string& asset_id) const {
  const TriangleMesh& m = mesh(asset_id);
  if (m.vertices.empty()) throw Error(ErrorCode::kEmptyCloud, "asset '" + asset_id + "' has no vertices");
  return m.bounds();
}

std::filesystem::path AssetDatabase::sim_cloud_cache_path(const std::string& asset_id) const {
  const AssetRecord& rec = at(asset_id);
  if (!rec.sim_cloud_path.empty()) return rec.sim_cloud_path;
  return cache_dir_ / (asset_id + "." + lidar_tag(lidar_, n_viewpoints_) + ".ply");
}

const PointCloud& AssetDatabase::sim_cloud(const std::string& asset_id) const {
  const TriangleMesh& m = mesh(asset_id);
  const std::filesystem::path cache = sim_cloud_cache_path(asset_id);
  std::lock_guard<std::mutex> lock(*mutex_);
  auto& slot = clouds_[asset_id];
  if (slot) return *slot;
  if (std::filesystem::exists(cache)) {
    auto cloud = std::make_shared<PointCloud>(read_ply(cache));
    cloud->frame = "asset";
    slot = std::move(cloud);
    ++cache_hits_;
    return *slot;
  }
  auto cloud = std::make_shared<PointCloud>(simulate_asset_cloud(m, lidar_, n_viewpoints_));
  ++simulations_;
  // Round to the PLY's float32 storage so a fresh simulation and a cache hit
  // hand out identical clouds.
  for (Vec3& p : cloud->points) {
    for (int k = 0; k < 3; ++k) p[k] = static_cast<double>(static_cast<float>(p[k]));
  }
  if (!cache_dir_.empty()) {
    std::filesystem::create_directories(cache.parent_path());
    write_ply(cache, *cloud);
  }
  slot = std::move(cloud);
  return *slot;
}

std::optional<std::string> AssetDatabase::asset_path(const std::string& asset_id) const {
  const AssetRecord* r = find(asset_id);
  if (!r) return std::nullopt;
  return std::filesystem::weakly_canonical(r->mesh_path).generic_string();
}

AssetDatabase build_asset_db(const std::filesystem::path& manifest_path, const LidarConfig& lidar,
                             const AssetDbOptions& options) {
  std::vector<AssetRecord> records = read_asset_manifest(manifest_path);
  for (const AssetRecord& r : records) {
    if (!std::filesystem::exists(r.mesh_path)) {
      throw Error(ErrorCode::kIo, "asset '" + r.id + "': mesh not found: " + r.mesh_path.string());
    }
  }
  const std::filesystem::path cache =
      options.cache_dir.value_or(manifest_path.parent_path() / "sim_cache");
  AssetDatabase db(std::move(records), lidar, options.n_viewpoints, cache);
  if (options.precompute) {
    for (const AssetRecord& r : db.records()) db.sim_cloud(r.id);
  }
  return db;
}

std::filesystem::path write_demo_database(const std::filesystem::path& dir,
                                          const DemoDatabaseOptions& options) {
  if (options.embedding_dim == 0 || options.views < 1) {
    throw Error(ErrorCode::kInvalidInput, "demo database needs dim >= 1 and views >= 1");
  }
  std::filesystem::create_directories(dir / "meshes");
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto random_unit = [&] {
    std::vector<double> v(options.embedding_dim);
    double n = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      n += x * x;
    }
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
  };

  std::vector<AssetRecord> records;
  for (const ProceduralAsset& asset : demo_catalogue()) {
    AssetRecord rec;
    rec.id = asset.id;
    rec.labels = asset.labels;
    rec.mesh_path = dir / "meshes" / (asset.id + ".obj");
    write_obj(rec.mesh_path, asset.mesh);
    const std::vector<double> base = random_unit();
    for (int v = 0; v < options.views; ++v) {
      const std::vector<double> jitter = random_unit();
      std::vector<double> e(options.embedding_dim);
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = base[k] + options.view_spread * jitter[k];
      rec.embeddings.push_back(std::move(e));
    }
    records.push_back(std::move(rec));
  }
  const std::filesystem::path manifest = dir / "assets.json";
  write_asset_manifest(manifest, records);

  const nlohmann::json labels = {{"office chair", "chair"}, {"armchair", "chair"},
                                 {"church bench", "chair"}, {"sofa", "couch"},
                                 {"bookshelf", "shelf"},    {"bookcase", "shelf"},
                                 {"desk", "table"},         {"dining table", "table"},
                                 {"trashcan", "trash can"}, {"garbage can", "trash can"},
                                 {"cupboard", "cabinet"}};
  std::ofstream out(dir / "labels.json");
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "labels.json").string());
  out << labels.dump(2) << "\n";
  return manifest;
}

}  // namespace usdrecon
