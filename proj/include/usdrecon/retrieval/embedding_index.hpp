// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

/// One database asset: semantic labels, a mesh, and one embedding per
/// rendered view.
struct AssetRecord {
  std::string id;
  std::vector<std::string> labels;
  std::filesystem::path mesh_path;
  /// Canonical-frame simulated LiDAR cloud, filled lazily.
  std::optional<PointCloud> sim_cloud;
  std::filesystem::path sim_cloud_path;
  std::vector<std::vector<double>> embeddings;

  bool has_label(std::string_view label) const;
};

struct QueryResult {
  std::string asset_id;
  double score;  ///< cosine similarity in [-1, 1]
  std::size_t view_index;
};

/// Exact cosine-similarity index over every (asset, view) embedding. Rows are
/// stored unit-normalized in one contiguous row-major block.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;

  std::size_t size() const { return row_asset_.size(); }
  std::size_t dimension() const { return dim_; }
  std::size_t asset_count() const { return asset_ids_.size(); }
  bool empty() const { return row_asset_.empty(); }

  /// Top-k distinct assets ranked by their best view. With a label, assets
  /// lacking it are dropped before ranking. Ties go to the asset added first.
  std::vector<QueryResult> query(std::span<const double> embedding,
                                 std::optional<std::string_view> label, std::size_t k) const;

  friend EmbeddingIndex build_index(std::span<const AssetRecord> assets);

 private:
  std::size_t dim_ = 0;
  std::vector<double> rows_;
  std::vector<std::size_t> row_asset_;
  std::vector<std::size_t> row_view_;
  std::vector<std::string> asset_ids_;
  std::vector<std::vector<std::string>> asset_labels_;
};

/// Throws kSchema on mixed dimensions or an asset without embeddings,
/// kInvalidEmbedding on zero/non-finite vectors, kDuplicateId on repeated ids.
EmbeddingIndex build_index(std::span<const AssetRecord> assets);

std::vector<QueryResult> query_similar(const EmbeddingIndex& index,
                                       std::span<const double> embedding,
                                       std::optional<std::string_view> label = std::nullopt,
                                       std::size_t k = 1);

/// Plain cosine similarity, scalar; used as the retrieval test oracle.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace usdrecon
