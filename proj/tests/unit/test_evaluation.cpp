#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <regex>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "usdrecon/evaluation/metrics.hpp"
#include "usdrecon/evaluation/svg.hpp"
#include "support/testing.hpp"

using namespace usdrecon;
using usdrecon::testing::error_code_of;
using usdrecon::testing::TempDir;

namespace {

Aabb square(double x, double y, double side = 1.0) { return {Vec3(x, y, 0), Vec3(x + side, y + side, 1)}; }

LabeledBox lb(std::string label, const Aabb& b) { return {std::move(label), b}; }

const ClassReport& find_class(const std::vector<ClassReport>& r, const std::string& label) {
  const auto it = std::find_if(r.begin(), r.end(), [&](const ClassReport& c) { return c.label == label; });
  if (it == r.end()) throw std::runtime_error("missing class " + label);
  return *it;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Iou, Examples) {
  EXPECT_DOUBLE_EQ(iou_xy(square(0, 0), square(0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(iou_xy(square(0, 0), square(3, 0)), 0.0);
  EXPECT_NEAR(iou_xy(square(0, 0), square(0.5, 0)), 1.0 / 3.0, 1e-12);
  // z is ignored.
  Aabb tall = square(0, 0);
  tall.max.z() = 10;
  EXPECT_DOUBLE_EQ(iou_xy(square(0, 0), tall), 1.0);
  // Degenerate union.
  const Aabb flat{Vec3(0, 0, 0), Vec3(0, 1, 1)};
  EXPECT_DOUBLE_EQ(iou_xy(flat, flat), 0.0);
}

TEST(Iou, SymmetricAndTranslationInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3), s(0.1, 2);
  for (int i = 0; i < 1000; ++i) {
    const Aabb a = square(u(rng), u(rng), s(rng));
    const Aabb b = square(u(rng), u(rng), s(rng));
    const double v = iou_xy(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou_xy(b, a));
    const Vec3 t(u(rng), u(rng), u(rng));
    EXPECT_NEAR(iou_xy(a.translated(t), b.translated(t)), v, 1e-12);
    EXPECT_NEAR(iou_xy(a, a), 1.0, 1e-15);
  }
}

TEST(Containment, Examples) {
  const Containment same = containment(lb("a", square(0, 0)), lb("a", square(0, 0)));
  EXPECT_TRUE(same.a_in_b);
  EXPECT_TRUE(same.b_in_a);

  // Small box off-center inside a large one: the large centroid is outside it.
  const Containment nest = containment(lb("a", square(0.1, 0.1, 0.2)), lb("a", square(0, 0, 2)));
  EXPECT_TRUE(nest.a_in_b);
  EXPECT_FALSE(nest.b_in_a);

  const Containment far = containment(lb("a", square(0, 0)), lb("a", square(5, 5)));
  EXPECT_FALSE(far.a_in_b);
  EXPECT_FALSE(far.b_in_a);

  // Closed boxes: a centroid on the boundary counts.
  const Containment edge = containment(lb("a", square(0, 0)), lb("a", square(0.5, 0)));
  EXPECT_TRUE(edge.a_in_b);
  EXPECT_TRUE(edge.b_in_a);
}

TEST(Report, PerfectPrediction) {
  const std::vector<LabeledBox> gt = {lb("chair", square(0, 0)), lb("chair", square(2, 0)), lb("chair", square(4, 0))};
  const auto r = per_class_report(gt, gt);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0].miou, 1.0);
  EXPECT_DOUBLE_EQ(r[0].sacc, 1.0);
  EXPECT_DOUBLE_EQ(r[0].racc, 1.0);
  EXPECT_EQ(r[0].n_pred, 3u);
  EXPECT_EQ(r[0].n_gt, 3u);
}

TEST(Report, NoPredictions) {
  const std::vector<LabeledBox> gt = {lb("chair", square(0, 0)), lb("table", square(2, 0))};
  const auto r = per_class_report({}, gt);
  ASSERT_EQ(r.size(), 2u);
  for (const ClassReport& c : r) {
    EXPECT_EQ(c.miou, 0.0);
    EXPECT_EQ(c.sacc, 0.0);
    EXPECT_EQ(c.racc, 0.0);
    EXPECT_EQ(c.n_pred, 0u);
    EXPECT_EQ(c.n_gt, 1u);
  }
}

TEST(Report, OneThirdOverlapOfTwo) {
  const std::vector<LabeledBox> gt = {lb("chair", square(0, 0)), lb("chair", square(5, 5))};
  const std::vector<LabeledBox> pred = {lb("chair", square(0.5, 0))};
  const ClassReport c = per_class_report(pred, gt)[0];
  EXPECT_NEAR(c.miou, 1.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(c.sacc, 0.5);
  EXPECT_DOUBLE_EQ(c.racc, 0.5);
  EXPECT_EQ(c.n_pred, 1u);
  EXPECT_EQ(c.n_gt, 2u);

  ReportOptions over_matched;
  over_matched.miou_over_matched = true;
  EXPECT_NEAR(per_class_report(pred, gt, over_matched)[0].miou, 1.0 / 3.0, 1e-12);
}

TEST(Report, HandWorkedMixedScene) {
  // Chairs: p0 matches g0 exactly; p1 overlaps g1 at IoU 1/3 (mutual
  // containment); g2 missed. Table: the prediction is nested off-center in
  // the gt box (one-way containment, IoU 0.04). Couch: a false positive only.
  const std::vector<LabeledBox> gt = {lb("chair", square(0, 0)), lb("chair", square(3, 0)),
                                      lb("chair", square(6, 0)), lb("table", square(0, 5, 2))};
  const std::vector<LabeledBox> pred = {lb("chair", square(0, 0)), lb("chair", square(3.5, 0)),
                                        lb("table", square(0.1, 5.1, 0.4)), lb("couch", square(9, 9))};
  const auto r = per_class_report(pred, gt);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].label, "chair");  // sorted by label
  EXPECT_EQ(r[1].label, "couch");
  EXPECT_EQ(r[2].label, "table");

  const ClassReport& chair = find_class(r, "chair");
  EXPECT_NEAR(chair.miou, (1.0 + 1.0 / 3.0 + 0.0) / 3.0, 1e-12);
  EXPECT_NEAR(chair.sacc, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(chair.racc, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(chair.matches.size(), 2u);

  const ClassReport& table = find_class(r, "table");
  EXPECT_NEAR(table.miou, 0.16 / 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(table.sacc, 0.0);
  EXPECT_DOUBLE_EQ(table.racc, 1.0);

  const ClassReport& couch = find_class(r, "couch");
  EXPECT_EQ(couch.n_gt, 0u);
  EXPECT_EQ(couch.n_pred, 1u);
  EXPECT_EQ(couch.miou, 0.0);
  EXPECT_EQ(couch.racc, 0.0);
}

TEST(Report, ContainmentFallbackWithoutOverlap) {
  // Zero-area prediction inside the gt box: IoU 0, but its centroid counts.
  const std::vector<LabeledBox> gt = {lb("lamp", square(0, 0))};
  const std::vector<LabeledBox> pred = {lb("lamp", Aabb{Vec3(0.5, 0.2, 0), Vec3(0.5, 0.8, 1)})};
  const ClassReport c = per_class_report(pred, gt)[0];
  ASSERT_EQ(c.matches.size(), 1u);
  EXPECT_DOUBLE_EQ(c.miou, 0.0);
  EXPECT_DOUBLE_EQ(c.racc, 1.0);
}

TEST(Report, PropertiesOnRandomScenes) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 6), s(0.3, 1.5);
  std::uniform_int_distribution<int> n(0, 7);
  const char* labels[] = {"chair", "table", "couch"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<LabeledBox> pred, gt;
    for (int i = n(rng); i > 0; --i) gt.push_back(lb(labels[i % 3], square(u(rng), u(rng), s(rng))));
    for (int i = n(rng); i > 0; --i) pred.push_back(lb(labels[i % 3], square(u(rng), u(rng), s(rng))));
    const auto r = per_class_report(pred, gt);
    for (const ClassReport& c : r) {
      EXPECT_LE(c.sacc, c.racc + 1e-15);
      for (double v : {c.miou, c.sacc, c.racc}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      std::set<std::size_t> ps, gs;
      for (const MatchedPair& m : c.matches) {
        EXPECT_TRUE(ps.insert(m.pred).second);
        EXPECT_TRUE(gs.insert(m.gt).second);
        EXPECT_TRUE(m.iou > 0.0 || m.contained.a_in_b || m.contained.b_in_a);
      }
    }
    auto p2 = pred, g2 = gt;
    std::shuffle(p2.begin(), p2.end(), rng);
    std::shuffle(g2.begin(), g2.end(), rng);
    const auto r2 = per_class_report(p2, g2);
    ASSERT_EQ(r2.size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_EQ(r2[i].label, r[i].label);
      EXPECT_DOUBLE_EQ(r2[i].miou, r[i].miou);
      EXPECT_DOUBLE_EQ(r2[i].sacc, r[i].sacc);
      EXPECT_DOUBLE_EQ(r2[i].racc, r[i].racc);
      EXPECT_EQ(r2[i].n_pred, r[i].n_pred);
    }
  }
}

TEST(Report, TableAndJson) {
  const std::vector<LabeledBox> gt = {lb("chair", square(0, 0)), lb("table", square(2, 0))};
  const auto r = per_class_report(gt, gt);
  const std::string table = report_to_table(r);
  for (const char* col : {"class", "mIoU", "sAcc", "rAcc", "pred/gt", "chair", "table", "1/1"}) {
    EXPECT_NE(table.find(col), std::string::npos) << col;
  }
  const auto j = nlohmann::json::parse(report_to_json(r));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["class"], "chair");
  EXPECT_EQ(j[0]["mIoU"].get<double>(), 1.0);
  EXPECT_EQ(j[1]["n_gt"].get<int>(), 1);
}

TEST(Boxes, JsonRoundTripAndErrors) {
  TempDir dir;
  const std::vector<LabeledBox> boxes = {lb("chair", Aabb{Vec3(-1, 0.5, 0), Vec3(0, 1.25, 0.9)}),
                                         lb("trash can", square(1.0 / 3.0, 2))};
  write_boxes(dir / "b.json", boxes);
  const auto back = read_boxes(dir / "b.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].label, "trash can");
  EXPECT_EQ(back[1].box.min, boxes[1].box.min);
  EXPECT_EQ(back[0].centroid(), Vec3(-0.5, 0.875, 0.45));

  EXPECT_EQ(error_code_of([] { boxes_from_json(R"([{"label":"a","min":[0,0],"max":[1,1,1]}])"); }), ErrorCode::kSchema);
  EXPECT_EQ(error_code_of([] { boxes_from_json(R"([{"label":"a","min":[2,0,0],"max":[1,1,1]}])"); }), ErrorCode::kSchema);
  EXPECT_EQ(error_code_of([] { boxes_from_json(R"({"label":"a"})"); }), ErrorCode::kSchema);
  EXPECT_EQ(error_code_of([&] { read_boxes(dir / "missing.json"); }), ErrorCode::kIo);
}

TEST(Boxes, FromScene) {
  SceneState s;
  PlacedAsset p;
  p.instance_id = 1;
  p.label = "chair";
  p.local_bounds = Aabb{Vec3(-0.5, -0.25, 0), Vec3(0.5, 0.25, 1)};
  p.pose = Pose::from_yaw(std::numbers::pi / 2, Vec3(2, 0, 0));
  s.placed.push_back(p);
  const auto b = boxes_from_scene(s);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].label, "chair");
  EXPECT_VEC_NEAR(b[0].box.min, Vec3(1.75, -0.5, 0), 1e-12);
  EXPECT_VEC_NEAR(b[0].box.max, Vec3(2.25, 0.5, 1), 1e-12);
}

TEST(Svg, WellFormedDrawing) {
  const std::vector<LabeledBox> pred = {lb("chair", square(0, 0)), lb("R&D <desk>", square(3, 1, 2))};
  const std::vector<LabeledBox> gt = {lb("chair", square(0.1, 0))};
  Waypoint a, b;
  a.position = Vec3(-1, -1, 0);
  b.position = Vec3(4, 4, 0);
  const std::string svg = boxes_to_svg(pred, gt, {a, b});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("R&amp;D &lt;desk&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("<desk>"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_EQ(count_of(svg, "<svg"), count_of(svg, "</svg>"));
  EXPECT_EQ(count_of(svg, "<text"), count_of(svg, "</text>"));

  // Extent: 60 px/m over [-1, 5] x [-1, 4] plus 0.5 m margins.
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("width=\"([0-9.]+)\" height=\"([0-9.]+)\"")));
  EXPECT_NEAR(std::stod(m[1]), 60.0 * 7.0, 1.0);
  EXPECT_NEAR(std::stod(m[2]), 60.0 * 6.0, 1.0);

  SvgOptions quiet;
  quiet.show_labels = false;
  EXPECT_EQ(boxes_to_svg(pred, gt, {}, quiet).find("R&amp;D"), std::string::npos);
  EXPECT_NE(boxes_to_svg({}, {}).find("</svg>"), std::string::npos);
}
