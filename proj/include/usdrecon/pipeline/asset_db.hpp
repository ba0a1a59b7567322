// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "usdrecon/retrieval/embedding_index.hpp"
#include "usdrecon/scan_sim/lidar.hpp"

namespace usdrecon {

/// Asset records plus their embedding index and lazily simulated canonical
/// clouds. Clouds are cached in memory and as PLY files under `cache_dir`
/// (named by asset id and a hash of the LiDAR settings).
class AssetDatabase {
 public:
  AssetDatabase() = default;
  AssetDatabase(std::vector<AssetRecord> records, LidarConfig lidar, int n_viewpoints,
                std::filesystem::path cache_dir);
  AssetDatabase(AssetDatabase&&) noexcept;
  AssetDatabase& operator=(AssetDatabase&&) noexcept;

  const std::vector<AssetRecord>& records() const { return records_; }
  const EmbeddingIndex& index() const { return index_; }
  const LidarConfig& lidar() const { return lidar_; }
  int n_viewpoints() const { return n_viewpoints_; }
  const std::filesystem::path& cache_dir() const { return cache_dir_; }

  /// Nullptr when unknown.
  const AssetRecord* find(const std::string& asset_id) const;
  /// Throws kMissingAsset when unknown.
  const AssetRecord& at(const std::string& asset_id) const;

  const TriangleMesh& mesh(const std::string& asset_id) const;
  Aabb mesh_bounds(const std::string& asset_id) const;

  /// Canonical simulated cloud: memory cache, then PLY cache, then ray casting
  /// (which also writes the PLY).
  const PointCloud& sim_cloud(const std::string& asset_id) const;
  std::filesystem::path sim_cloud_cache_path(const std::string& asset_id) const;

  /// Mesh path as referenced from emitted USDA.
  std::optional<std::string> asset_path(const std::string& asset_id) const;

  std::size_t cache_hits() const { return cache_hits_; }
  std::size_t simulations() const { return simulations_; }

 private:
  std::vector<AssetRecord> records_;
  std::map<std::string, std::size_t> by_id_;
  EmbeddingIndex index_;
  LidarConfig lidar_;
  int n_viewpoints_ = 4;
  std::filesystem::path cache_dir_;

  mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  mutable std::map<std::string, std::shared_ptr<const TriangleMesh>> meshes_;
  mutable std::map<std::string, std::shared_ptr<const PointCloud>> clouds_;
  mutable std::size_t cache_hits_ = 0;
  mutable std::size_t simulations_ = 0;
};

struct AssetDbOptions {
  int n_viewpoints = 4;
  /// Simulate (or load) every cloud up front instead of on first use.
  bool precompute = true;
  /// Defaults to "<manifest dir>/sim_cache".
  std::optional<std::filesystem::path> cache_dir;
};

/// Loads the manifest, checks every mesh exists, builds the index and fills
/// the cloud cache. Errors: kIo (missing mesh), kSchema, kDuplicateId,
/// kInvalidEmbedding.
AssetDatabase build_asset_db(const std::filesystem::path& manifest_path,
                             const LidarConfig& lidar = {}, const AssetDbOptions& options = {});

struct DemoDatabaseOptions {
  std::size_t embedding_dim = 32;
  int views = 4;
  /// Spread of each view around its asset's base direction.
  double view_spread = 0.3;
  std::uint64_t seed = 2024;
};

/// Writes the procedural catalogue as OBJ meshes, an assets.json manifest with
/// seeded per-view embeddings, and a labels.json canonicalization table.
/// View v corresponds to a viewer at bearing 2*pi*v/views in the asset frame.
/// Returns the manifest path.
std::filesystem::path write_demo_database(const std::filesystem::path& dir,
                                          const DemoDatabaseOptions& options = {});

}  // namespace usdrecon
