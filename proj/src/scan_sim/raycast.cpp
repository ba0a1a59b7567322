// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/scan_sim/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {

// Moller-Trumbore, double sided. Returns t or a negative value on miss.
double intersect(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = d.cross(e2);
  const double det = e1.dot(pvec);
  const double scale = e1.norm() * e2.norm();
  if (std::abs(det) <= 1e-12 * scale) return -1.0;  // parallel to the plane
  const double inv = 1.0 / det;
  const Vec3 tvec = o - a;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Vec3 qvec = tvec.cross(e1);
  const double v = d.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  return e2.dot(qvec) * inv;
}

bool slab(const Aabb& box, const Vec3& o, const Vec3& inv_d, double t_max, double& t_enter) {
  double t0 = 0.0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    double ta = (box.min[k] - o[k]) * inv_d[k];
    double tb = (box.max[k] - o[k]) * inv_d[k];
    if (std::isnan(ta) || std::isnan(tb)) {
      // Ray parallel to this slab and starting on its boundary plane.
      if (o[k] < box.min[k] || o[k] > box.max[k]) return false;
      continue;
    }
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  t_enter = t0;
  return true;
}

}  // namespace

std::optional<RayHit> raycast_triangle(const TriangleMesh& mesh, const Vec3& origin,
                                       const Vec3& direction, double max_range) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !origin.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "ray direction must be finite and non-zero");
  }
  const Vec3 d = direction / n;
  std::optional<RayHit> best;
  for (std::uint32_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const double hit_t = intersect(origin, d, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (hit_t > kMinHitDistance && hit_t <= max_range && (!best || hit_t < best->distance)) {
      best = RayHit{origin + hit_t * d, hit_t, i};
    }
  }
  return best;
}

MeshBvh::MeshBvh(TriangleMesh mesh) : mesh_(std::move(mesh)) {
  mesh_.validate();
  const std::size_t n = mesh_.triangles.size();
  if (n == 0) return;
  tri_bounds_.resize(n);
  tri_centers_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = mesh_.triangles[i];
    Aabb b{mesh_.vertices[t[0]], mesh_.vertices[t[0]]};
    b.expand(mesh_.vertices[t[1]]);
    b.expand(mesh_.vertices[t[2]]);
    tri_bounds_[i] = b;
    tri_centers_[i] = b.center();
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * n);
  build(0, static_cast<std::uint32_t>(n));
}

std::int32_t MeshBvh::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.bounds = tri_bounds_[order_[begin]];
  for (std::uint32_t i = begin; i < end; ++i) {
    node.bounds.expand(tri_bounds_[order_[i]].min);
    node.bounds.expand(tri_bounds_[order_[i]].max);
  }
  node.begin = begin;
  node.end = end;
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 4) return id;

  Aabb centers{tri_centers_[order_[begin]], tri_centers_[order_[begin]]};
  for (std::uint32_t i = begin; i < end; ++i) centers.expand(tri_centers_[order_[i]]);
  int axis = 0;
  centers.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = tri_centers_[a][axis], cb = tri_centers_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::optional<RayHit> MeshBvh::cast(const Vec3& origin, const Vec3& d, double max_range) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_d = d.cwiseInverse();
  double best_t = max_range;
  std::uint32_t best_tri = 0;
  bool found = false;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    double t_enter = 0.0;
    if (!slab(node.bounds, origin, inv_d, best_t, t_enter)) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t tri = order_[i];
        const auto& t = mesh_.triangles[tri];
        const double hit_t = intersect(origin, d, mesh_.vertices[t[0]], mesh_.vertices[t[1]], mesh_.vertices[t[2]]);
        if (hit_t > kMinHitDistance && hit_t <= max_range &&
            (hit_t < best_t || (hit_t == best_t && (!found || tri < best_tri)))) {
          best_t = hit_t;
          best_tri = tri;
          found = true;
        }
      }
      continue;
    }
    stack[top++] = node.left;
    stack[top++] = node.right;
  }
  if (!found) return std::nullopt;
  return RayHit{origin + best_t * d, best_t, best_tri};
}

}  // namespace usdrecon
