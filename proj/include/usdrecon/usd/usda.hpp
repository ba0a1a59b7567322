// SPDX-License-Identifier: Apache-2.0
#pragma once

// The USDA subset this library reads and writes: a `#usda 1.0` header with
// optional stage metadata, nested `def` prims with parenthesized metadata
// (including `prepend references = @path@`), attribute assignments with
// number, string, asset-path, tuple and array literals, and `#` comments.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usdrecon/reconciliation/scene.hpp"

namespace usdrecon {

struct UsdaValue {
  enum class Kind { kNumber, kString, kAssetPath, kIdentifier, kTuple, kArray };
  Kind kind = Kind::kNumber;
  /// Literal text for numbers (kept verbatim for byte-exact re-emission),
  /// decoded contents for strings and asset paths, the word for identifiers.
  std::string text;
  double number = 0.0;
  std::vector<UsdaValue> items;

  static UsdaValue real(double v);
  /// Formats at single precision (float-typed attributes).
  static UsdaValue real_f(float v);
  static UsdaValue integer(long long v);
  static UsdaValue string(std::string s);
  static UsdaValue asset(std::string path);
  static UsdaValue identifier(std::string word);
  static UsdaValue tuple(std::vector<UsdaValue> items);
  static UsdaValue array(std::vector<UsdaValue> items);

  /// Numbers compare by value, everything else structurally.
  friend bool operator==(const UsdaValue& a, const UsdaValue& b);
};

/// `[list-op] key = value` inside a metadata block.
struct UsdaMetadata {
  std::string list_op;  ///< "prepend", "append", ... or empty
  std::string key;
  UsdaValue value;
  friend bool operator==(const UsdaMetadata&, const UsdaMetadata&) = default;
};

struct UsdaAttribute {
  bool custom = false;
  bool uniform = false;
  std::string type;  ///< e.g. "double3", "token[]"
  std::string name;  ///< namespaced, e.g. "xformOp:translate"
  std::optional<UsdaValue> value;
  std::vector<UsdaMetadata> metadata;
  friend bool operator==(const UsdaAttribute&, const UsdaAttribute&) = default;
};

struct UsdaPrim {
  std::string specifier = "def";
  std::string type_name;  ///< "Xform"; may be empty
  std::string name;
  std::vector<UsdaMetadata> metadata;
  std::vector<UsdaAttribute> attributes;
  std::vector<UsdaPrim> children;

  const UsdaAttribute* attribute(std::string_view name) const;
  const UsdaPrim* child(std::string_view name) const;
  /// Asset path of the first `references` metadata entry, if any.
  std::optional<std::string> reference() const;
  friend bool operator==(const UsdaPrim&, const UsdaPrim&) = default;
};

struct UsdaStage {
  std::vector<UsdaMetadata> metadata;
  std::vector<UsdaPrim> prims;

  const UsdaMetadata* find_metadata(std::string_view key) const;
  std::optional<std::string> default_prim() const;
  friend bool operator==(const UsdaStage&, const UsdaStage&) = default;
};

/// Throws ParseError (line, column) on any lexical or structural problem,
/// including unclosed blocks and duplicate prim paths.
UsdaStage parse_usda(std::string_view text);

/// Deterministic serialization; parse_usda(write_usda(s)) == s.
std::string write_usda(const UsdaStage& stage);

bool is_valid_prim_name(std::string_view name);

/// Maps an asset id to the file referenced by its prim.
using AssetPathResolver = std::function<std::optional<std::string>(const std::string& asset_id)>;

/// Stage with one Xform "World" holding `object_<instance_id>` prims in
/// instance-id order. Throws kMissingAsset when the resolver has no path.
UsdaStage stage_from_scene(const SceneState& scene, const AssetPathResolver& resolve);
std::string emit_usda(const SceneState& scene, const AssetPathResolver& resolve);

/// Inverse of stage_from_scene for the serialized fields (clouds are not
/// stored). Throws kInvalidScene on missing or malformed object attributes.
SceneState scene_from_stage(const UsdaStage& stage);

/// Field-by-field comparison of what emit_usda stores: ids, labels, asset ids,
/// frames, bounds and scores exactly, translations within `translate_tol` and
/// orientations within `rotation_tol` radians.
bool structurally_equal(const SceneState& a, const SceneState& b, double translate_tol = 1e-12,
                        double rotation_tol = 1e-6, std::string* why = nullptr);

}  // namespace usdrecon
