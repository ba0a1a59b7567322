// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cmath>
#include <cstdio>

#include "usdrecon/usd/usda.hpp"

namespace usdrecon {

namespace {

template <typename T>
std::string shortest(T v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\x%02x", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out + "\"";
}

void write_value(std::string& out, const UsdaValue& v) {
  switch (v.kind) {
    case UsdaValue::Kind::kNumber:
    case UsdaValue::Kind::kIdentifier:
      out += v.text;
      return;
    case UsdaValue::Kind::kString:
      out += quote(v.text);
      return;
    case UsdaValue::Kind::kAssetPath:
      out += "@" + v.text + "@";
      return;
    case UsdaValue::Kind::kTuple:
    case UsdaValue::Kind::kArray: {
      const bool tuple = v.kind == UsdaValue::Kind::kTuple;
      out.push_back(tuple ? '(' : '[');
      for (std::size_t i = 0; i < v.items.size(); ++i) {
        if (i) out += ", ";
        write_value(out, v.items[i]);
      }
      out.push_back(tuple ? ')' : ']');
      return;
    }
  }
}

void indent(std::string& out, int level) { out.append(static_cast<std::size_t>(level) * 4, ' '); }

void write_metadata(std::string& out, const std::vector<UsdaMetadata>& md, int level) {
  out += "(\n";
  for (const UsdaMetadata& m : md) {
    indent(out, level + 1);
    if (!m.list_op.empty()) out += m.list_op + " ";
    out += m.key + " = ";
    write_value(out, m.value);
    out += "\n";
  }
  indent(out, level);
  out += ")";
}

void write_prim(std::string& out, const UsdaPrim& prim, int level) {
  indent(out, level);
  out += prim.specifier;
  if (!prim.type_name.empty()) out += " " + prim.type_name;
  out += " " + quote(prim.name);
  if (!prim.metadata.empty()) {
    out += " ";
    write_metadata(out, prim.metadata, level);
  }
  out += "\n";
  indent(out, level);
  out += "{\n";
  for (const UsdaAttribute& a : prim.attributes) {
    indent(out, level + 1);
    if (a.custom) out += "custom ";
    if (a.uniform) out += "uniform ";
    out += a.type + " " + a.name;
    if (a.value) {
      out += " = ";
      write_value(out, *a.value);
    }
    if (!a.metadata.empty()) {
      out += " ";
      write_metadata(out, a.metadata, level + 1);
    }
    out += "\n";
  }
  for (std::size_t i = 0; i < prim.children.size(); ++i) {
    if (i > 0 || !prim.attributes.empty()) out += "\n";
    write_prim(out, prim.children[i], level + 1);
  }
  indent(out, level);
  out += "}\n";
}

}  // namespace

UsdaValue UsdaValue::real(double v) {
  UsdaValue out;
  out.number = v;
  out.text = std::isnan(v) ? "nan" : shortest(v);
  return out;
}

UsdaValue UsdaValue::real_f(float v) {
  UsdaValue out;
  out.number = v;
  out.text = std::isnan(v) ? "nan" : shortest(v);
  return out;
}

UsdaValue UsdaValue::integer(long long v) {
  UsdaValue out;
  out.number = static_cast<double>(v);
  out.text = std::to_string(v);
  return out;
}

UsdaValue UsdaValue::string(std::string s) {
  UsdaValue out;
  out.kind = Kind::kString;
  out.text = std::move(s);
  return out;
}

UsdaValue UsdaValue::asset(std::string path) {
  UsdaValue out;
  out.kind = Kind::kAssetPath;
  out.text = std::move(path);
  return out;
}

UsdaValue UsdaValue::identifier(std::string word) {
  UsdaValue out;
  out.kind = Kind::kIdentifier;
  out.text = std::move(word);
  return out;
}

UsdaValue UsdaValue::tuple(std::vector<UsdaValue> items) {
  UsdaValue out;
  out.kind = Kind::kTuple;
  out.items = std::move(items);
  return out;
}

UsdaValue UsdaValue::array(std::vector<UsdaValue> items) {
  UsdaValue out;
  out.kind = Kind::kArray;
  out.items = std::move(items);
  return out;
}

bool operator==(const UsdaValue& a, const UsdaValue& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == UsdaValue::Kind::kNumber) {
    return a.number == b.number || (std::isnan(a.number) && std::isnan(b.number));
  }
  return a.text == b.text && a.items == b.items;
}

const UsdaAttribute* UsdaPrim::attribute(std::string_view attr_name) const {
  for (const UsdaAttribute& a : attributes) {
    if (a.name == attr_name) return &a;
  }
  return nullptr;
}

const UsdaPrim* UsdaPrim::child(std::string_view child_name) const {
  for (const UsdaPrim& c : children) {
    if (c.name == child_name) return &c;
  }
  return nullptr;
}

std::optional<std::string> UsdaPrim::reference() const {
  for (const UsdaMetadata& m : metadata) {
    if (m.key != "references") continue;
    if (m.value.kind == UsdaValue::Kind::kAssetPath) return m.value.text;
    if (m.value.kind == UsdaValue::Kind::kArray && !m.value.items.empty() &&
        m.value.items.front().kind == UsdaValue::Kind::kAssetPath) {
      return m.value.items.front().text;
    }
  }
  return std::nullopt;
}

const UsdaMetadata* UsdaStage::find_metadata(std::string_view key) const {
  for (const UsdaMetadata& m : metadata) {
    if (m.key == key) return &m;
  }
  return nullptr;
}

std::optional<std::string> UsdaStage::default_prim() const {
  const UsdaMetadata* m = find_metadata("defaultPrim");
  if (!m || m->value.kind != UsdaValue::Kind::kString) return std::nullopt;
  return m->value.text;
}

std::string write_usda(const UsdaStage& stage) {
  std::string out = "#usda 1.0\n";
  if (!stage.metadata.empty()) {
    write_metadata(out, stage.metadata, 0);
    out += "\n";
  }
  for (const UsdaPrim& p : stage.prims) {
    out += "\n";
    write_prim(out, p, 0);
  }
  return out;
}

}  // namespace usdrecon
