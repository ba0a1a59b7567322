// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/scan_sim/procedural.hpp"

namespace usdrecon {

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                            (i & 4) ? hi.z() : lo.z());
  }
  // Counter-clockwise seen from outside.
  m.triangles = {{0, 2, 1}, {1, 2, 3},   // -z
                 {4, 5, 6}, {5, 7, 6},   // +z
                 {0, 1, 4}, {1, 5, 4},   // -y
                 {2, 6, 3}, {3, 6, 7},   // +y
                 {0, 4, 2}, {2, 4, 6},   // -x
                 {1, 3, 5}, {3, 7, 5}};  // +x
  return m;
}

namespace {

void add_box(TriangleMesh& m, const Vec3& lo, const Vec3& hi) { append_mesh(m, make_box(lo, hi)); }

}  // namespace

TriangleMesh make_chair(double w, double d, double seat_h, double back_h) {
  TriangleMesh m;
  const double leg = 0.04, seat_t = 0.05, hx = d / 2, hy = w / 2;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const Vec3 c(sx * (hx - leg / 2), sy * (hy - leg / 2), 0.0);
      add_box(m, {c.x() - leg / 2, c.y() - leg / 2, 0.0}, {c.x() + leg / 2, c.y() + leg / 2, seat_h - seat_t});
    }
  }
  add_box(m, {-hx, -hy, seat_h - seat_t}, {hx, hy, seat_h});
  // Backrest on the -x side, so the chair faces +x.
  add_box(m, {-hx, -hy, seat_h}, {-hx + 0.05, hy, seat_h + back_h});
  return m;
}

TriangleMesh make_table(double w, double d, double h) {
  TriangleMesh m;
  const double leg = 0.06, top_t = 0.04, hx = w / 2, hy = d / 2;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const Vec3 c(sx * (hx - 0.05), sy * (hy - 0.05), 0.0);
      add_box(m, {c.x() - leg / 2, c.y() - leg / 2, 0.0}, {c.x() + leg / 2, c.y() + leg / 2, h - top_t});
    }
  }
  add_box(m, {-hx, -hy, h - top_t}, {hx, hy, h});
  return m;
}

TriangleMesh make_couch(double w, double d, double h) {
  TriangleMesh m;
  const double hx = d / 2, hy = w / 2, arm = 0.15;
  add_box(m, {-hx, -hy, 0.0}, {hx, hy, 0.42});               // base
  add_box(m, {-hx, -hy, 0.42}, {-hx + 0.2, hy, h});          // back
  add_box(m, {-hx, -hy, 0.42}, {hx, -hy + arm, 0.62});       // arms
  add_box(m, {-hx, hy - arm, 0.42}, {hx, hy, 0.62});
  return m;
}

TriangleMesh make_cabinet(double w, double d, double h) {
  TriangleMesh m;
  add_box(m, {-d / 2, -w / 2, 0.0}, {d / 2, w / 2, h});
  add_box(m, {d / 2, -0.02, h * 0.45}, {d / 2 + 0.03, 0.02, h * 0.55});  // handle
  return m;
}

TriangleMesh make_shelf(double w, double d, double h, int shelves) {
  TriangleMesh m;
  const double t = 0.03, hx = d / 2, hy = w / 2;
  add_box(m, {-hx, -hy, 0.0}, {hx, -hy + t, h});
  add_box(m, {-hx, hy - t, 0.0}, {hx, hy, h});
  add_box(m, {-hx, -hy, 0.0}, {-hx + t, hy, h});  // back panel
  for (int s = 0; s < shelves; ++s) {
    const double z = s * (h - t) / std::max(shelves - 1, 1);
    add_box(m, {-hx, -hy + t, z}, {hx, hy - t, z + t});
  }
  return m;
}

TriangleMesh make_wall(double length, double thickness, double height) {
  return make_box({-thickness / 2, -length / 2, 0.0}, {thickness / 2, length / 2, height});
}

std::vector<ProceduralAsset> demo_catalogue() {
  std::vector<ProceduralAsset> out;
  out.push_back({"chair_office", {"chair"}, make_chair(0.50, 0.50, 0.46, 0.45)});
  out.push_back({"chair_dining", {"chair"}, make_chair(0.44, 0.46, 0.45, 0.55)});
  out.push_back({"chair_lounge", {"chair"}, make_chair(0.70, 0.66, 0.40, 0.35)});
  out.push_back({"table_dining", {"table"}, make_table(1.60, 0.90, 0.75)});
  out.push_back({"table_side", {"table"}, make_table(0.55, 0.55, 0.55)});
  out.push_back({"table_desk", {"table", "desk"}, make_table(1.20, 0.70, 0.74)});
  out.push_back({"couch_two_seat", {"couch", "sofa"}, make_couch(1.50, 0.85, 0.85)});
  out.push_back({"couch_three_seat", {"couch", "sofa"}, make_couch(2.10, 0.90, 0.80)});
  out.push_back({"cabinet_tall", {"cabinet"}, make_cabinet(0.80, 0.45, 1.80)});
  out.push_back({"cabinet_low", {"cabinet"}, make_cabinet(1.00, 0.50, 0.90)});
  out.push_back({"shelf_book", {"shelf"}, make_shelf(0.90, 0.35, 1.60, 5)});
  out.push_back({"trash_can", {"trash can"}, make_cabinet(0.35, 0.35, 0.60)});
  return out;
}

}  // namespace usdrecon
