// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "usdrecon/retrieval/embedding_index.hpp"

namespace usdrecon {

/// assets.json: array of {id, labels[], mesh, sim_cloud?, embeddings[[...]]}.
/// Relative paths are resolved against the manifest's directory.
std::vector<AssetRecord> read_asset_manifest(const std::filesystem::path& path);
void write_asset_manifest(const std::filesystem::path& path,
                          const std::vector<AssetRecord>& records);

}  // namespace usdrecon
