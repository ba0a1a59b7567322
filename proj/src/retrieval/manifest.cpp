// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/retrieval/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string relative_to(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty()) return {};
  const auto rel = p.lexically_relative(base);
  if (!rel.empty() && rel.native().rfind("..", 0) != 0) return rel.generic_string();
  return p.generic_string();
}

}  // namespace

std::vector<AssetRecord> read_asset_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open asset manifest: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("asset manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::kSchema, "asset manifest must be a JSON array");
  const auto base = path.parent_path();
  std::vector<AssetRecord> records;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& item = j[i];
    const std::string where = "assets[" + std::to_string(i) + "]";
    try {
      AssetRecord rec;
      rec.id = item.at("id").get<std::string>();
      rec.labels = item.at("labels").get<std::vector<std::string>>();
      rec.mesh_path = resolve(base, item.at("mesh").get<std::string>());
      if (item.contains("sim_cloud") && item["sim_cloud"].is_string()) {
        rec.sim_cloud_path = resolve(base, item["sim_cloud"].get<std::string>());
      }
      rec.embeddings = item.at("embeddings").get<std::vector<std::vector<double>>>();
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, where + ": " + e.what());
    }
    if (!seen.insert(records.back().id).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate asset id '" + records.back().id + "'");
    }
  }
  return records;
}

void write_asset_manifest(const std::filesystem::path& path,
                          const std::vector<AssetRecord>& records) {
  const auto base = path.parent_path();
  json j = json::array();
  for (const AssetRecord& r : records) {
    json item;
    item["id"] = r.id;
    item["labels"] = r.labels;
    item["mesh"] = relative_to(base, r.mesh_path);
    if (!r.sim_cloud_path.empty()) item["sim_cloud"] = relative_to(base, r.sim_cloud_path);
    item["embeddings"] = r.embeddings;
    j.push_back(std::move(item));
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write asset manifest: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace usdrecon
