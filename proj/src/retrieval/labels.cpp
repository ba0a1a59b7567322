// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/retrieval/labels.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "usdrecon/error.hpp"

namespace usdrecon {

std::string normalize_label(std::string_view label) {
  std::string out;
  bool pending_space = false;
  for (char c : label) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '_') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

LabelCanonicalizer::LabelCanonicalizer(std::map<std::string, std::string> table) {
  for (auto& [from, to] : table) table_[normalize_label(from)] = normalize_label(to);
}

LabelCanonicalizer LabelCanonicalizer::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("label map is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "label map must be a JSON object");
  std::map<std::string, std::string> table;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) {
      throw Error(ErrorCode::kSchema, "label map value for '" + it.key() + "' must be a string");
    }
    table[it.key()] = it.value().get<std::string>();
  }
  return LabelCanonicalizer(std::move(table));
}

LabelCanonicalizer LabelCanonicalizer::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open label map: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string LabelCanonicalizer::canonical(std::string_view label) const {
  std::string key = normalize_label(label);
  if (auto it = table_.find(key); it != table_.end()) return it->second;
  return key;
}

}  // namespace usdrecon
