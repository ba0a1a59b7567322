// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "usdrecon/error.hpp"
#include "usdrecon/geometry/convex_hull.hpp"
#include "usdrecon/geometry/voxel.hpp"
#include "usdrecon/reconciliation/scene.hpp"

namespace usdrecon {

double combined_score(const ScoreBreakdown& s, const ScoreWeights& w) {
  if (!s.has_support()) return kNoSupportScore;
  return w.distribution * std::clamp(s.distribution, 0.0, 1.0) + w.density * s.density;
}

Aabb world_bounds(const PlacedAsset& p) {
  if (p.local_bounds) return transform_aabb(*p.local_bounds, p.pose);
  return aabb_of(p.registered_cloud);
}

void translate_placement(PlacedAsset& p, const Vec3& delta) {
  p.pose.translation += delta;
  for (Vec3& q : p.registered_cloud.points) q += delta;
}

void validate_scene(const SceneState& scene) {
  std::unordered_set<std::uint64_t> ids;
  for (const PlacedAsset& p : scene.placed) {
    if (!ids.insert(p.instance_id).second) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate instance id " + std::to_string(p.instance_id));
    }
    validate_pose(p.pose, 1e-6);
  }
}

namespace {

// Range of voxel layers [lo, hi] (inclusive, possibly empty) whose centers
// lie inside the hull along one vertical column.
struct Column {
  std::int64_t lo = 0;
  std::int64_t hi = -1;
};

// A hull plane solved for z: z = c - a*x - b*y, tolerance slack included.
// Vertical planes instead reject columns where c - a*x - b*y < 0.
struct ZPlane {
  double a, b, c;
};

struct ColumnPlanes {
  std::vector<ZPlane> upper, lower, side;
};

ColumnPlanes column_planes(const ConvexHull3& hull, double tol) {
  ColumnPlanes out;
  for (const HullPlane& pl : hull.planes) {
    const double nz = pl.normal.z();
    if (std::abs(nz) < 1e-12) {
      out.side.push_back({pl.normal.x(), pl.normal.y(), pl.offset + tol});
      continue;
    }
    // Tolerance in plane distance converts to |tol / n_z| along z.
    const double slack = tol / std::abs(nz);
    ZPlane z{pl.normal.x() / nz, pl.normal.y() / nz, pl.offset / nz};
    if (nz > 0.0) {
      z.c += slack;
      out.upper.push_back(z);
    } else {
      z.c -= slack;
      out.lower.push_back(z);
    }
  }
  return out;
}

double eval(const ZPlane& p, double x, double y) { return p.c - p.a * x - p.b * y; }

// Drops planes that cannot decide any column whose center lies in the
// rectangle [x0,x1]x[y0,y1]. Planes are linear, so extremes sit at corners.
// An upper plane whose minimum over the rectangle exceeds the smallest
// per-plane maximum is never the lowest one there (and symmetrically for
// lower planes); a side plane non-negative at all corners never rejects.
ColumnPlanes prune(const ColumnPlanes& all, double x0, double x1, double y0, double y1) {
  const double xs[2] = {x0, x1};
  const double ys[2] = {y0, y1};
  auto extremes = [&](const ZPlane& p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : xs) {
      for (double y : ys) {
        const double v = eval(p, x, y);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    return std::pair{lo, hi};
  };
  ColumnPlanes out;
  double cap = std::numeric_limits<double>::infinity();
  for (const ZPlane& p : all.upper) cap = std::min(cap, extremes(p).second);
  for (const ZPlane& p : all.upper) {
    if (extremes(p).first <= cap) out.upper.push_back(p);
  }
  double floor = -std::numeric_limits<double>::infinity();
  for (const ZPlane& p : all.lower) floor = std::max(floor, extremes(p).first);
  for (const ZPlane& p : all.lower) {
    if (extremes(p).second >= floor) out.lower.push_back(p);
  }
  for (const ZPlane& p : all.side) {
    if (extremes(p).first < 0.0) out.side.push_back(p);
  }
  return out;
}

Column column_range(const ColumnPlanes& planes, double x, double y, double z0, double voxel,
                    std::int64_t nz) {
  for (const ZPlane& p : planes.side) {
    if (eval(p, x, y) < 0.0) return {};
  }
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const ZPlane& p : planes.upper) hi = std::min(hi, eval(p, x, y));
  for (const ZPlane& p : planes.lower) lo = std::max(lo, eval(p, x, y));
  if (lo > hi) return {};
  // Center of layer k is z0 + (k + 0.5) * voxel.
  Column c;
  c.lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((lo - z0) / voxel - 0.5)));
  c.hi = std::min<std::int64_t>(nz - 1,
                                static_cast<std::int64_t>(std::floor((hi - z0) / voxel - 0.5)));
  return c;
}

}  // namespace

ScoreBreakdown score_placement(const PlacedAsset& placement, const NeighborIndex& scene_index,
                               const ScoreOptions& options) {
  if (!(options.voxel_size > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "voxel size must be positive");
  }
  HullOptions hull_options;
  hull_options.inflate_degenerate = true;
  const ConvexHull3 hull = convex_hull_3d(placement.registered_cloud, hull_options);
  const Aabb box = hull.bounds();
  const double v = options.voxel_size;
  const auto cells = [&](double extent) {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(extent / v - 1e-9)));
  };
  const std::int64_t nx = cells(box.extent().x());
  const std::int64_t ny = cells(box.extent().y());
  const std::int64_t nz = cells(box.extent().z());

  std::vector<Column> columns(static_cast<std::size_t>(nx * ny));
  ScoreBreakdown out;
  const ColumnPlanes planes = column_planes(hull, options.hull_tolerance);
  constexpr std::int64_t kBlock = 8;
  for (std::int64_t bx = 0; bx < nx; bx += kBlock) {
    for (std::int64_t by = 0; by < ny; by += kBlock) {
      const std::int64_t ex = std::min(nx, bx + kBlock);
      const std::int64_t ey = std::min(ny, by + kBlock);
      const auto cx = [&](std::int64_t ix) { return box.min.x() + (ix + 0.5) * v; };
      const auto cy = [&](std::int64_t iy) { return box.min.y() + (iy + 0.5) * v; };
      const ColumnPlanes local = prune(planes, cx(bx), cx(ex - 1), cy(by), cy(ey - 1));
      for (std::int64_t ix = bx; ix < ex; ++ix) {
        for (std::int64_t iy = by; iy < ey; ++iy) {
          const Column c = column_range(local, cx(ix), cy(iy), box.min.z(), v, nz);
          columns[static_cast<std::size_t>(ix * ny + iy)] = c;
          if (c.hi >= c.lo) out.total_voxels += static_cast<std::size_t>(c.hi - c.lo + 1);
        }
      }
    }
  }
  if (scene_index.empty() || out.total_voxels == 0) return out;

  std::unordered_map<std::int64_t, std::size_t> counts;
  for (std::size_t idx : scene_index.box_search(box.inflated(options.hull_tolerance))) {
    const Vec3 p = scene_index.point(idx);
    if (!hull.contains(p, options.hull_tolerance)) continue;
    const VoxelKey key = voxel_key(p, v, box.min);
    if (key[0] < 0 || key[1] < 0 || key[2] < 0 || key[0] >= nx || key[1] >= ny || key[2] >= nz) {
      continue;
    }
    const Column& c = columns[static_cast<std::size_t>(key[0] * ny + key[1])];
    if (key[2] < c.lo || key[2] > c.hi) continue;
    ++counts[(key[0] * ny + key[1]) * nz + key[2]];
  }
  out.occupied_voxels = counts.size();
  if (counts.empty()) return out;

  double sum = 0.0;
  for (const auto& [key, n] : counts) sum += static_cast<double>(n);
  out.mean = sum / static_cast<double>(counts.size());
  double var = 0.0;
  for (const auto& [key, n] : counts) {
    const double d = static_cast<double>(n) - out.mean;
    var += d * d;
  }
  out.stddev = std::sqrt(var / static_cast<double>(counts.size()));
  out.distribution = 1.0 - out.stddev / out.mean;
  out.density = static_cast<double>(out.occupied_voxels) / static_cast<double>(out.total_voxels);
  return out;
}

ScoreBreakdown score_placement(const PlacedAsset& placement, const PointCloud& scene_cloud,
                               const ScoreOptions& options) {
  if (scene_cloud.empty()) return score_placement(placement, NeighborIndex(), options);
  return score_placement(placement, NeighborIndex(scene_cloud), options);
}

}  // namespace usdrecon
