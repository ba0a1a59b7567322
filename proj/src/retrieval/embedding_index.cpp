// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/retrieval/embedding_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "usdrecon/error.hpp"
#include "usdrecon/retrieval/labels.hpp"
#include "usdrecon/simd/kernels.hpp"

namespace usdrecon {

bool AssetRecord::has_label(std::string_view label) const {
  const std::string wanted = normalize_label(label);
  return std::any_of(labels.begin(), labels.end(),
                     [&](const std::string& l) { return normalize_label(l) == wanted; });
}

EmbeddingIndex build_index(std::span<const AssetRecord> assets) {
  EmbeddingIndex index;
  std::unordered_set<std::string> seen;
  for (const AssetRecord& asset : assets) {
    if (!seen.insert(asset.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate asset id: " + asset.id);
    }
    if (asset.embeddings.empty()) {
      throw Error(ErrorCode::kSchema, "asset has no embeddings: " + asset.id);
    }
    const std::size_t asset_slot = index.asset_ids_.size();
    index.asset_ids_.push_back(asset.id);
    std::vector<std::string> labels;
    for (const auto& l : asset.labels) labels.push_back(normalize_label(l));
    index.asset_labels_.push_back(std::move(labels));

    for (std::size_t v = 0; v < asset.embeddings.size(); ++v) {
      const auto& e = asset.embeddings[v];
      if (index.dim_ == 0) index.dim_ = e.size();
      if (e.size() != index.dim_ || e.empty()) {
        throw Error(ErrorCode::kSchema, "embedding dimension mismatch in asset " + asset.id);
      }
      double norm_sq = 0.0;
      for (double x : e) {
        if (!std::isfinite(x)) {
          throw Error(ErrorCode::kInvalidEmbedding, "non-finite embedding in asset " + asset.id);
        }
        norm_sq += x * x;
      }
      if (!(norm_sq > 0.0)) {
        throw Error(ErrorCode::kInvalidEmbedding, "zero embedding in asset " + asset.id);
      }
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double x : e) index.rows_.push_back(x * inv);
      index.row_asset_.push_back(asset_slot);
      index.row_view_.push_back(v);
    }
  }
  return index;
}

std::vector<QueryResult> EmbeddingIndex::query(std::span<const double> embedding,
                                               std::optional<std::string_view> label,
                                               std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidInput, "k must be at least 1");
  double norm_sq = 0.0;
  for (double x : embedding) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidInput, "query embedding is not finite");
    norm_sq += x * x;
  }
  if (empty()) return {};
  if (embedding.size() != dim_) {
    throw Error(ErrorCode::kSchema, "query dimension does not match the index");
  }
  if (!(norm_sq > 0.0)) throw Error(ErrorCode::kInvalidInput, "query embedding is zero");

  std::vector<double> query(embedding.begin(), embedding.end());
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : query) x *= inv;

  std::vector<double> scores(size());
  simd::dot_rows(rows_, query, scores);

  std::vector<bool> allowed(asset_ids_.size(), true);
  if (label) {
    const std::string wanted = normalize_label(*label);
    for (std::size_t a = 0; a < asset_ids_.size(); ++a) {
      const auto& ls = asset_labels_[a];
      allowed[a] = std::find(ls.begin(), ls.end(), wanted) != ls.end();
    }
  }

  constexpr double kUnset = -std::numeric_limits<double>::infinity();
  std::vector<double> best(asset_ids_.size(), kUnset);
  std::vector<std::size_t> best_view(asset_ids_.size(), 0);
  std::vector<bool> touched(asset_ids_.size(), false);
  for (std::size_t r = 0; r < size(); ++r) {
    const std::size_t a = row_asset_[r];
    if (!allowed[a]) continue;
    // Clamp rounding spill so scores stay inside [-1, 1].
    const double s = std::clamp(scores[r], -1.0, 1.0);
    if (!touched[a] || s > best[a]) {
      best[a] = s;
      best_view[a] = row_view_[r];
      touched[a] = true;
    }
  }

  std::vector<std::size_t> candidates;
  for (std::size_t a = 0; a < asset_ids_.size(); ++a) {
    if (touched[a]) candidates.push_back(a);
  }
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), [&](std::size_t x, std::size_t y) {
                      return best[x] > best[y] || (best[x] == best[y] && x < y);
                    });
  std::vector<QueryResult> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t a = candidates[i];
    out.push_back({asset_ids_[a], best[a], best_view[a]});
  }
  return out;
}

std::vector<QueryResult> query_similar(const EmbeddingIndex& index,
                                       std::span<const double> embedding,
                                       std::optional<std::string_view> label, std::size_t k) {
  return index.query(embedding, label, k);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace usdrecon
