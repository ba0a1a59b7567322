// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace usdrecon {

/// Maps fine-grained detector labels onto the generic labels used by the
/// asset database ("church bench" -> "chair"). Lookups are case-insensitive
/// and whitespace-trimmed; unmapped labels pass through normalized.
class LabelCanonicalizer {
 public:
  LabelCanonicalizer() = default;
  explicit LabelCanonicalizer(std::map<std::string, std::string> table);

  /// JSON object of {"detector label": "canonical label"}.
  static LabelCanonicalizer from_json_file(const std::filesystem::path& path);
  static LabelCanonicalizer from_json_text(std::string_view text);

  std::string canonical(std::string_view label) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::string> table_;
};

std::string normalize_label(std::string_view label);

}  // namespace usdrecon
