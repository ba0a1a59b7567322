// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/geometry/kd_tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "usdrecon/error.hpp"
#include "usdrecon/simd/kernels.hpp"

namespace usdrecon {

namespace {

double box_squared_distance(const Aabb& box, const Vec3& q) {
  const Vec3 below = (box.min - q).cwiseMax(0.0);
  const Vec3 above = (q - box.max).cwiseMax(0.0);
  return (below + above).squaredNorm();
}

}  // namespace

NeighborIndex::NeighborIndex(const PointCloud& cloud, std::size_t leaf_size) {
  build(cloud.points, leaf_size);
}

NeighborIndex::NeighborIndex(const std::vector<Vec3>& points, std::size_t leaf_size) {
  build(points, leaf_size);
}

void NeighborIndex::build(const std::vector<Vec3>& points, std::size_t leaf_size) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidInput, "cloud too large for neighbor index");
  }
  if (points.empty()) return;
  leaf_size = std::max<std::size_t>(leaf_size, 1);
  std::vector<std::uint32_t> order(points.size());
  std::iota(order.begin(), order.end(), 0u);
  nodes_.reserve(2 * points.size() / leaf_size + 1);
  build_node(order, 0, static_cast<std::uint32_t>(points.size()), points, leaf_size);

  xs_.resize(points.size());
  ys_.resize(points.size());
  zs_.resize(points.size());
  original_ = order;
  slot_of_.resize(points.size());
  for (std::size_t s = 0; s < order.size(); ++s) {
    const Vec3& p = points[order[s]];
    xs_[s] = p.x();
    ys_[s] = p.y();
    zs_[s] = p.z();
    slot_of_[order[s]] = static_cast<std::uint32_t>(s);
  }
}

std::int32_t NeighborIndex::build_node(std::vector<std::uint32_t>& order, std::uint32_t begin,
                                       std::uint32_t end, const std::vector<Vec3>& points,
                                       std::size_t leaf_size) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.bounds = {points[order[begin]], points[order[begin]]};
  for (std::uint32_t i = begin; i < end; ++i) node.bounds.expand(points[order[i]]);

  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= leaf_size) {
    // Ascending original order inside a leaf gives linear-scan tie semantics.
    std::sort(order.begin() + begin, order.begin() + end);
    return id;
  }

  int axis = 0;
  node.bounds.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points[a][axis];
                     const double pb = points[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points[order[mid]][axis];
  const std::int32_t left = build_node(order, begin, mid, points, leaf_size);
  const std::int32_t right = build_node(order, mid, end, points, leaf_size);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NeighborIndex::search_nearest(std::int32_t node_id, const Vec3& q, std::size_t& best_index,
                                   double& best_sq) const {
  const Node& node = nodes_[node_id];
  if (box_squared_distance(node.bounds, q) > best_sq) return;
  if (node.axis < 0) {
    const std::size_t n = node.end - node.begin;
    const auto r = simd::nearest_of(std::span(xs_).subspan(node.begin, n),
                                    std::span(ys_).subspan(node.begin, n),
                                    std::span(zs_).subspan(node.begin, n), q.x(), q.y(), q.z());
    if (r.index < n) {
      const std::size_t orig = original_[node.begin + r.index];
      if (r.value < best_sq || (r.value == best_sq && orig < best_index)) {
        best_sq = r.value;
        best_index = orig;
      }
    }
    return;
  }
  const bool go_left_first = q[node.axis] < node.split;
  const std::int32_t first = go_left_first ? node.left : node.right;
  const std::int32_t second = go_left_first ? node.right : node.left;
  search_nearest(first, q, best_index, best_sq);
  search_nearest(second, q, best_index, best_sq);
}

Neighbor NeighborIndex::nearest(const Vec3& query) const {
  if (empty()) throw Error(ErrorCode::kEmptyIndex, "nearest-neighbor query on empty index");
  std::size_t best_index = std::numeric_limits<std::size_t>::max();
  double best_sq = std::numeric_limits<double>::infinity();
  search_nearest(0, query, best_index, best_sq);
  return {best_index, std::sqrt(best_sq)};
}

bool NeighborIndex::nearest_within(const Vec3& query, double max_distance, Neighbor& out) const {
  if (empty()) return false;
  std::size_t best_index = std::numeric_limits<std::size_t>::max();
  double best_sq = max_distance * max_distance;
  search_nearest(0, query, best_index, best_sq);
  if (best_index == std::numeric_limits<std::size_t>::max()) return false;
  out = {best_index, std::sqrt(best_sq)};
  return true;
}

std::vector<std::size_t> NeighborIndex::radius_search(const Vec3& query, double radius) const {
  std::vector<std::size_t> result;
  if (empty()) return result;
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  std::vector<double> scratch;
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_squared_distance(node.bounds, query) > r2) continue;
    if (node.axis >= 0) {
      stack.push_back(node.left);
      stack.push_back(node.right);
      continue;
    }
    const std::size_t n = node.end - node.begin;
    scratch.resize(n);
    simd::squared_distances(std::span(xs_).subspan(node.begin, n),
                            std::span(ys_).subspan(node.begin, n),
                            std::span(zs_).subspan(node.begin, n), query.x(), query.y(),
                            query.z(), scratch);
    for (std::size_t i = 0; i < n; ++i) {
      if (scratch[i] <= r2) result.push_back(original_[node.begin + i]);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<std::size_t> NeighborIndex::box_search(const Aabb& box) const {
  std::vector<std::size_t> result;
  if (empty()) return result;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if ((node.bounds.max.array() < box.min.array()).any() ||
        (node.bounds.min.array() > box.max.array()).any()) {
      continue;
    }
    if (node.axis >= 0) {
      stack.push_back(node.left);
      stack.push_back(node.right);
      continue;
    }
    for (std::uint32_t s = node.begin; s < node.end; ++s) {
      if (box.contains(Vec3(xs_[s], ys_[s], zs_[s]))) result.push_back(original_[s]);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

Vec3 NeighborIndex::point(std::size_t original_index) const {
  const std::uint32_t s = slot_of_.at(original_index);
  return {xs_[s], ys_[s], zs_[s]};
}

Neighbor brute_force_nearest(const std::vector<Vec3>& points, const Vec3& query) {
  if (points.empty()) throw Error(ErrorCode::kEmptyIndex, "nearest-neighbor query on empty set");
  std::vector<double> xs(points.size()), ys(points.size()), zs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    xs[i] = points[i].x();
    ys[i] = points[i].y();
    zs[i] = points[i].z();
  }
  const auto r = simd::nearest_of(xs, ys, zs, query.x(), query.y(), query.z());
  return {r.index, std::sqrt(r.value)};
}

}  // namespace usdrecon
