// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "usdrecon/error.hpp"
#include "usdrecon/reconciliation/scene.hpp"

namespace usdrecon {

namespace {

// Strict weak order: higher combined score first, then lower instance id.
bool ranks_before(const PlacedAsset& a, const PlacedAsset& b) {
  if (a.combined != b.combined) return a.combined > b.combined;
  return a.instance_id < b.instance_id;
}

}  // namespace

std::vector<std::vector<std::size_t>> cluster_nms(const std::vector<PlacedAsset>& placed,
                                                  double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidInput, "NMS radius must be positive");
  std::vector<std::size_t> order(placed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(placed[a], placed[b]);
  });

  std::vector<bool> assigned(placed.size(), false);
  std::vector<std::vector<std::size_t>> clusters;
  const double r2 = radius * radius;
  for (std::size_t seed : order) {
    if (assigned[seed]) continue;
    assigned[seed] = true;
    std::vector<std::size_t> cluster{seed};
    const Vec3& c = placed[seed].pose.translation;
    for (std::size_t other : order) {
      if (assigned[other]) continue;
      if ((placed[other].pose.translation - c).squaredNorm() <= r2) {
        assigned[other] = true;
        cluster.push_back(other);
      }
    }
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

SceneState select_representatives(const SceneState& scene,
                                   const std::vector<std::vector<std::size_t>>& clusters) {
  std::vector<bool> keep(scene.placed.size(), false);
  for (const auto& cluster : clusters) {
    if (cluster.empty()) continue;
    std::size_t best = cluster.front();
    for (std::size_t idx : cluster) {
      if (idx >= scene.placed.size()) {
        throw Error(ErrorCode::kInvalidInput, "cluster index out of range");
      }
      if (ranks_before(scene.placed[idx], scene.placed[best])) best = idx;
    }
    keep[best] = true;
  }
  SceneState out = scene;
  out.placed.clear();
  for (std::size_t i = 0; i < scene.placed.size(); ++i) {
    if (keep[i]) out.placed.push_back(scene.placed[i]);
  }
  std::sort(out.placed.begin(), out.placed.end(),
            [](const PlacedAsset& a, const PlacedAsset& b) { return a.instance_id < b.instance_id; });
  return out;
}

namespace {

double axis_overlap(const Aabb& a, const Aabb& b, int axis) {
  return std::min(a.max[axis], b.max[axis]) - std::max(a.min[axis], b.min[axis]);
}

// Lowers or lifts every asset onto the ground or its highest support. A box
// supports another only if its top is no higher than the other's mid-height,
// so shallow sinking is undone but side-by-side overlaps are left to the
// separation pass. Returns true if anything moved.
bool drop_pass(std::vector<PlacedAsset>& placed, double ground_z, const SettleOptions& opt) {
  std::vector<Aabb> boxes;
  boxes.reserve(placed.size());
  for (const PlacedAsset& p : placed) boxes.push_back(world_bounds(p));

  std::vector<std::size_t> order(placed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (boxes[a].min.z() != boxes[b].min.z()) return boxes[a].min.z() < boxes[b].min.z();
    return placed[a].instance_id < placed[b].instance_id;
  });

  bool moved = false;
  for (std::size_t i : order) {
    double rest = ground_z;
    const double center_z = boxes[i].center().z();
    for (std::size_t j = 0; j < placed.size(); ++j) {
      if (j == i || boxes[j].max.z() > center_z) continue;
      const double smaller = std::min(boxes[i].footprint_area(), boxes[j].footprint_area());
      if (smaller <= 0.0) continue;
      if (overlap_area_xy(boxes[i], boxes[j]) > opt.support_overlap * smaller) {
        rest = std::max(rest, boxes[j].max.z());
      }
    }
    const double dz = rest - boxes[i].min.z();
    if (std::abs(dz) > opt.contact_tolerance) {
      translate_placement(placed[i], Vec3(0.0, 0.0, dz));
      boxes[i] = boxes[i].translated(Vec3(0.0, 0.0, dz));
      moved = true;
    }
  }
  return moved;
}

// Pushes interpenetrating pairs apart along the cheaper horizontal axis.
bool separate_pass(std::vector<PlacedAsset>& placed, const SettleOptions& opt) {
  bool moved = false;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      const Aabb a = world_bounds(placed[i]);
      const Aabb b = world_bounds(placed[j]);
      const double ox = axis_overlap(a, b, 0);
      const double oy = axis_overlap(a, b, 1);
      const double oz = axis_overlap(a, b, 2);
      if (ox <= opt.contact_tolerance || oy <= opt.contact_tolerance ||
          oz <= opt.contact_tolerance) {
        continue;
      }
      // The smaller footprint moves; on near-equal footprints the
      // worse-scored one, then the later instance.
      const double fa = a.footprint_area(), fb = b.footprint_area();
      bool move_i;
      if (std::abs(fa - fb) > opt.footprint_tie * std::max(fa, fb)) {
        move_i = fa < fb;
      } else if (placed[i].combined != placed[j].combined) {
        move_i = placed[i].combined < placed[j].combined;
      } else {
        move_i = placed[i].instance_id > placed[j].instance_id;
      }
      const Aabb& mover = move_i ? a : b;
      const Aabb& anchor = move_i ? b : a;
      const int axis = ox <= oy ? 0 : 1;
      const double push = axis == 0 ? ox : oy;
      const double sign = mover.center()[axis] >= anchor.center()[axis] ? 1.0 : -1.0;
      Vec3 delta = Vec3::Zero();
      delta[axis] = sign * push;
      translate_placement(move_i ? placed[i] : placed[j], delta);
      moved = true;
    }
  }
  return moved;
}

}  // namespace

SceneState settle_scene(const SceneState& scene, double ground_z, int max_passes,
                        const SettleOptions& options) {
  if (max_passes < 1) throw Error(ErrorCode::kInvalidInput, "max_passes must be >= 1");
  SceneState out = scene;
  out.settle_warning = false;
  for (int pass = 0; pass < max_passes; ++pass) {
    const bool dropped = drop_pass(out.placed, ground_z, options);
    const bool separated = separate_pass(out.placed, options);
    if (!dropped && !separated) return out;
  }
  // Out of passes: accept the state if it already is a fixed point.
  SceneState probe = out;
  const bool dropped = drop_pass(probe.placed, ground_z, options);
  const bool separated = separate_pass(probe.placed, options);
  out.settle_warning = dropped || separated;
  return out;
}

}  // namespace usdrecon
