// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/geometry/ply_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary PLY I/O assumes a little-endian host");

enum class ScalarType { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

struct Property {
  std::string name;
  ScalarType type;
};

ScalarType parse_type(const std::string& t) {
  if (t == "char" || t == "int8") return ScalarType::kInt8;
  if (t == "uchar" || t == "uint8") return ScalarType::kUint8;
  if (t == "short" || t == "int16") return ScalarType::kInt16;
  if (t == "ushort" || t == "uint16") return ScalarType::kUint16;
  if (t == "int" || t == "int32") return ScalarType::kInt32;
  if (t == "uint" || t == "uint32") return ScalarType::kUint32;
  if (t == "float" || t == "float32") return ScalarType::kFloat32;
  if (t == "double" || t == "float64") return ScalarType::kFloat64;
  throw Error(ErrorCode::kParse, "unsupported PLY property type: " + t);
}

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUint8: return 1;
    case ScalarType::kInt16:
    case ScalarType::kUint16: return 2;
    case ScalarType::kInt32:
    case ScalarType::kUint32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
  }
  return 0;
}

template <typename T>
double load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode(ScalarType t, const char* p) {
  switch (t) {
    case ScalarType::kInt8: return load_as<std::int8_t>(p);
    case ScalarType::kUint8: return load_as<std::uint8_t>(p);
    case ScalarType::kInt16: return load_as<std::int16_t>(p);
    case ScalarType::kUint16: return load_as<std::uint16_t>(p);
    case ScalarType::kInt32: return load_as<std::int32_t>(p);
    case ScalarType::kUint32: return load_as<std::uint32_t>(p);
    case ScalarType::kFloat32: return load_as<float>(p);
    case ScalarType::kFloat64: return load_as<double>(p);
  }
  return 0.0;
}

}  // namespace

void write_ply(std::ostream& out, const PointCloud& cloud, PlyFormat format) {
  out << "ply\n"
      << (format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
      << "comment frame " << cloud.frame << "\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "end_header\n";
  if (format == PlyFormat::kAscii) {
    char buf[64];
    for (const Vec3& p : cloud.points) {
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", static_cast<float>(p.x()),
                    static_cast<float>(p.y()), static_cast<float>(p.z()));
      out << buf;
    }
  } else {
    std::vector<float> raw;
    raw.reserve(cloud.size() * 3);
    for (const Vec3& p : cloud.points) {
      raw.push_back(static_cast<float>(p.x()));
      raw.push_back(static_cast<float>(p.y()));
      raw.push_back(static_cast<float>(p.z()));
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing PLY stream");
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, PlyFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  write_ply(out, cloud, format);
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw Error(ErrorCode::kParse, "missing PLY magic");
  }
  bool ascii = false;
  bool have_format = false;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool vertex_seen = false;
  std::vector<Property> props;
  PointCloud cloud;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        ascii = true;
      } else if (fmt != "binary_little_endian") {
        throw Error(ErrorCode::kParse, "unsupported PLY format: " + fmt);
      }
      have_format = true;
    } else if (key == "comment") {
      std::string word, value;
      ls >> word >> value;
      if (word == "frame" && !value.empty()) cloud.frame = value;
    } else if (key == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      if (vertex_seen && name != "vertex") {
        in_vertex = false;  // trailing elements are ignored
        continue;
      }
      in_vertex = name == "vertex";
      if (in_vertex) {
        vertex_seen = true;
        vertex_count = count;
      } else {
        throw Error(ErrorCode::kParse, "PLY element before vertex is not supported: " + name);
      }
    } else if (key == "property") {
      if (!in_vertex) continue;
      std::string type, name;
      ls >> type;
      if (type == "list") throw Error(ErrorCode::kParse, "list property in vertex element");
      ls >> name;
      props.push_back({name, parse_type(type)});
    }
  }
  if (!have_format || !vertex_seen) throw Error(ErrorCode::kParse, "incomplete PLY header");
  int ix = -1, iy = -1, iz = -1;
  for (int i = 0; i < static_cast<int>(props.size()); ++i) {
    if (props[i].name == "x") ix = i;
    if (props[i].name == "y") iy = i;
    if (props[i].name == "z") iz = i;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::kParse, "PLY vertex lacks x/y/z");

  cloud.points.reserve(vertex_count);
  if (ascii) {
    std::vector<double> values(props.size());
    for (std::size_t v = 0; v < vertex_count; ++v) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(in >> values[i])) throw Error(ErrorCode::kParse, "truncated ASCII PLY body");
        // Match the binary path: a float property holds a float.
        if (props[i].type == ScalarType::kFloat32) {
          values[i] = static_cast<double>(static_cast<float>(values[i]));
        }
      }
      cloud.points.emplace_back(values[ix], values[iy], values[iz]);
    }
  } else {
    std::vector<std::size_t> offsets(props.size());
    std::size_t stride = 0;
    for (std::size_t i = 0; i < props.size(); ++i) {
      offsets[i] = stride;
      stride += type_size(props[i].type);
    }
    std::vector<char> buffer(stride * vertex_count);
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
      throw Error(ErrorCode::kParse, "truncated binary PLY body");
    }
    for (std::size_t v = 0; v < vertex_count; ++v) {
      const char* row = buffer.data() + v * stride;
      cloud.points.emplace_back(decode(props[ix].type, row + offsets[ix]),
                                decode(props[iy].type, row + offsets[iy]),
                                decode(props[iz].type, row + offsets[iz]));
    }
  }
  validate_cloud(cloud);
  return cloud;
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open PLY: " + path.string());
  return read_ply(in);
}

}  // namespace usdrecon
