// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>

#include "usdrecon/geometry/point_cloud.hpp"

namespace usdrecon {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// Writes x, y, z as float32 vertex properties.
void write_ply(std::ostream& out, const PointCloud& cloud, PlyFormat format);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Reads the vertex element's x, y, z. Other vertex properties (any scalar
/// type) are skipped. Throws kIo or kParse on malformed files.
PointCloud read_ply(std::istream& in);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace usdrecon
