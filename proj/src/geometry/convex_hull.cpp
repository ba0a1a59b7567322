// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/geometry/convex_hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {

struct Face {
  std::array<int, 3> v;
  Vec3 normal;
  double offset;
  std::vector<int> outside;
  bool alive = true;
};

Face make_face(const std::vector<Vec3>& pts, int a, int b, int c) {
  Face f;
  f.v = {a, b, c};
  f.normal = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double n = f.normal.norm();
  if (n > 0.0) f.normal /= n;
  f.offset = f.normal.dot(pts[a]);
  return f;
}

double distance_above(const Face& f, const Vec3& p) { return f.normal.dot(p) - f.offset; }

// Rank of the point set: 0 (single point), 1 (collinear), 2 (coplanar), 3.
// Fills the indices of an initial simplex as far as the rank allows.
int affine_rank(const std::vector<Vec3>& pts, double eps, std::array<int, 4>& simplex) {
  // Extreme points along the axes; keep the most separated pair.
  int best_a = 0, best_b = 0;
  double best_d = -1.0;
  for (int axis = 0; axis < 3; ++axis) {
    int lo = 0, hi = 0;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (pts[i][axis] < pts[lo][axis]) lo = i;
      if (pts[i][axis] > pts[hi][axis]) hi = i;
    }
    const double d = (pts[hi] - pts[lo]).norm();
    if (d > best_d) {
      best_d = d;
      best_a = lo;
      best_b = hi;
    }
  }
  simplex[0] = best_a;
  simplex[1] = best_b;
  if (best_d <= eps) return 0;

  const Vec3 dir = (pts[best_b] - pts[best_a]).normalized();
  int c = -1;
  double best_line = eps;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const Vec3 rel = pts[i] - pts[best_a];
    const double d = (rel - rel.dot(dir) * dir).norm();
    if (d > best_line) {
      best_line = d;
      c = i;
    }
  }
  if (c < 0) return 1;
  simplex[2] = c;

  const Vec3 normal = (pts[best_b] - pts[best_a]).cross(pts[c] - pts[best_a]).normalized();
  int d_idx = -1;
  double best_plane = eps;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const double d = std::abs(normal.dot(pts[i] - pts[best_a]));
    if (d > best_plane) {
      best_plane = d;
      d_idx = i;
    }
  }
  if (d_idx < 0) return 2;
  simplex[3] = d_idx;
  return 3;
}

std::vector<Vec3> inflate(const std::vector<Vec3>& pts, int rank,
                          const std::array<int, 4>& simplex, double amount) {
  // Axes missing from the point set's affine span.
  std::vector<Vec3> axes;
  if (rank == 2) {
    axes.push_back((pts[simplex[1]] - pts[simplex[0]])
                       .cross(pts[simplex[2]] - pts[simplex[0]])
                       .normalized());
  } else if (rank == 1) {
    const Vec3 dir = (pts[simplex[1]] - pts[simplex[0]]).normalized();
    Vec3 helper = std::abs(dir.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 u = dir.cross(helper).normalized();
    axes.push_back(u);
    axes.push_back(dir.cross(u).normalized());
  } else {
    axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  }
  std::vector<Vec3> out;
  out.reserve(pts.size() * 2 * axes.size());
  for (const Vec3& p : pts) {
    for (const Vec3& a : axes) {
      out.push_back(p + amount * a);
      out.push_back(p - amount * a);
    }
  }
  return out;
}

ConvexHull3 quickhull(const std::vector<Vec3>& pts, const std::array<int, 4>& simplex,
                      double eps) {
  std::vector<Face> faces;
  {
    const Vec3 inner = 0.25 * (pts[simplex[0]] + pts[simplex[1]] + pts[simplex[2]] +
                               pts[simplex[3]]);
    const int tri[4][3] = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    for (const auto& t : tri) {
      Face f = make_face(pts, simplex[t[0]], simplex[t[1]], simplex[t[2]]);
      if (distance_above(f, inner) > 0.0) f = make_face(pts, simplex[t[0]], simplex[t[2]], simplex[t[1]]);
      faces.push_back(std::move(f));
    }
  }
  const std::set<int> seeds(simplex.begin(), simplex.end());
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    if (seeds.count(i)) continue;
    for (Face& f : faces) {
      if (distance_above(f, pts[i]) > eps) {
        f.outside.push_back(i);
        break;
      }
    }
  }

  for (;;) {
    int current = -1;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
      if (faces[i].alive && !faces[i].outside.empty()) {
        current = i;
        break;
      }
    }
    if (current < 0) break;

    int apex = -1;
    double far = -1.0;
    for (int idx : faces[current].outside) {
      const double d = distance_above(faces[current], pts[idx]);
      if (d > far) {
        far = d;
        apex = idx;
      }
    }
    const Vec3& p = pts[apex];

    std::vector<int> visible;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
      if (faces[i].alive && distance_above(faces[i], p) > eps) visible.push_back(i);
    }
    std::set<std::pair<int, int>> visible_edges;
    for (int fi : visible) {
      const auto& v = faces[fi].v;
      for (int e = 0; e < 3; ++e) visible_edges.insert({v[e], v[(e + 1) % 3]});
    }
    std::vector<std::pair<int, int>> horizon;
    for (const auto& edge : visible_edges) {
      if (!visible_edges.count({edge.second, edge.first})) horizon.push_back(edge);
    }

    std::vector<int> orphans;
    for (int fi : visible) {
      faces[fi].alive = false;
      for (int idx : faces[fi].outside) {
        if (idx != apex) orphans.push_back(idx);
      }
      faces[fi].outside.clear();
    }

    const int first_new = static_cast<int>(faces.size());
    for (const auto& [a, b] : horizon) faces.push_back(make_face(pts, a, b, apex));
    for (int idx : orphans) {
      for (int fi = first_new; fi < static_cast<int>(faces.size()); ++fi) {
        if (distance_above(faces[fi], pts[idx]) > eps) {
          faces[fi].outside.push_back(idx);
          break;
        }
      }
    }
  }

  ConvexHull3 hull;
  std::unordered_map<int, int> remap;
  for (const Face& f : faces) {
    if (!f.alive) continue;
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      auto [it, inserted] = remap.emplace(f.v[k], static_cast<int>(hull.vertices.size()));
      if (inserted) hull.vertices.push_back(pts[f.v[k]]);
      tri[k] = it->second;
    }
    hull.faces.push_back(tri);
    hull.planes.push_back({f.normal, f.offset});
  }
  return hull;
}

}  // namespace

double ConvexHull3::volume() const {
  if (vertices.empty()) return 0.0;
  const Vec3 ref = vertices.front();
  double six_v = 0.0;
  for (const auto& f : faces) {
    six_v += (vertices[f[0]] - ref).dot((vertices[f[1]] - ref).cross(vertices[f[2]] - ref));
  }
  return std::max(six_v / 6.0, 0.0);
}

double ConvexHull3::signed_distance(const Vec3& p) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const HullPlane& plane : planes) worst = std::max(worst, plane.normal.dot(p) - plane.offset);
  return worst;
}

ConvexHull3 convex_hull_3d(const PointCloud& cloud, const HullOptions& options) {
  return convex_hull_3d(cloud.points, options);
}

ConvexHull3 convex_hull_3d(const std::vector<Vec3>& points, const HullOptions& options) {
  if (points.empty()) throw Error(ErrorCode::kEmptyCloud, "convex hull of empty cloud");
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::kInvalidInput, "non-finite point in hull input");
  }
  double scale = 0.0;
  for (const Vec3& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const Aabb box = aabb_of(points);
  scale = std::max(scale, box.extent().maxCoeff());
  const double eps = 64.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-3);

  std::array<int, 4> simplex{};
  const int rank = affine_rank(points, eps, simplex);
  if (rank == 3) return quickhull(points, simplex, eps);

  if (!options.inflate_degenerate) {
    throw Error(ErrorCode::kDegenerateGeometry,
                rank == 2 ? "hull input is coplanar" : "hull input is collinear or a point");
  }
  const std::vector<Vec3> thick = inflate(points, rank, simplex, options.inflation);
  std::array<int, 4> thick_simplex{};
  if (affine_rank(thick, eps, thick_simplex) != 3) {
    throw Error(ErrorCode::kDegenerateGeometry, "hull inflation failed");
  }
  ConvexHull3 hull = quickhull(thick, thick_simplex, eps);
  hull.inflated = true;
  return hull;
}

}  // namespace usdrecon
