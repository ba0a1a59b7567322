// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reader for the flat TOML subset used by pipeline config files: [section]
// headers (dotted names allowed), `key = value` lines with booleans,
// integers, floats (incl. inf/nan) and basic or literal strings, and
// `#` comments. Arrays, inline tables and multi-line strings are rejected.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace usdrecon {

struct TomlEntry {
  std::variant<bool, long long, double, std::string> value;
  std::size_t line = 0;
  std::size_t column = 0;
};

/// Keys are "section.key" ("key" before any header). Throws ParseError on
/// syntax errors and duplicate keys.
std::map<std::string, TomlEntry> parse_toml_subset(std::string_view text);

}  // namespace usdrecon
