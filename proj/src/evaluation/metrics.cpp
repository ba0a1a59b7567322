// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/evaluation/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <utility>

#include "usdrecon/error.hpp"

namespace usdrecon {

double iou_xy(const Aabb& a, const Aabb& b) {
  const double inter = overlap_area_xy(a, b);
  const double uni = a.footprint_area() + b.footprint_area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

bool contains_xy(const Aabb& box, const Vec3& p) {
  return p.x() >= box.min.x() && p.x() <= box.max.x() && p.y() >= box.min.y() &&
         p.y() <= box.max.y();
}

using BoxKey = std::array<double, 6>;
BoxKey key_of(const Aabb& b) {
  return {b.min.x(), b.min.y(), b.min.z(), b.max.x(), b.max.y(), b.max.z()};
}

ClassReport report_for_class(const std::string& label, const std::vector<const LabeledBox*>& pred,
                             const std::vector<const LabeledBox*>& gt,
                             const ReportOptions& options) {
  ClassReport r;
  r.label = label;
  r.n_pred = pred.size();
  r.n_gt = gt.size();

  struct Candidate {
    std::size_t p, g;
    double iou;
    double dist;
  };
  // Order-independent tie-break on the boxes themselves.
  const auto tie = [&](const Candidate& a, const Candidate& b) {
    return std::make_pair(key_of(gt[a.g]->box), key_of(pred[a.p]->box)) <
           std::make_pair(key_of(gt[b.g]->box), key_of(pred[b.p]->box));
  };

  std::vector<Candidate> by_iou, by_containment;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double iou = iou_xy(pred[p]->box, gt[g]->box);
      const double dist = (pred[p]->centroid() - gt[g]->centroid()).head<2>().norm();
      if (iou > 0.0) {
        by_iou.push_back({p, g, iou, dist});
      } else {
        const Containment c = containment(*pred[p], *gt[g]);
        if (c.a_in_b || c.b_in_a) by_containment.push_back({p, g, iou, dist});
      }
    }
  }
  std::sort(by_iou.begin(), by_iou.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return tie(a, b);
  });
  std::sort(by_containment.begin(), by_containment.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.dist != b.dist) return a.dist < b.dist;
              return tie(a, b);
            });

  std::vector<bool> pred_used(pred.size(), false), gt_used(gt.size(), false);
  const auto take = [&](const std::vector<Candidate>& list) {
    for (const Candidate& c : list) {
      if (pred_used[c.p] || gt_used[c.g]) continue;
      pred_used[c.p] = gt_used[c.g] = true;
      r.matches.push_back({c.p, c.g, c.iou, containment(*pred[c.p], *gt[c.g])});
    }
  };
  take(by_iou);
  take(by_containment);

  double iou_sum = 0.0;
  std::size_t strict = 0, relaxed = 0;
  for (const MatchedPair& m : r.matches) {
    iou_sum += m.iou;
    strict += m.contained.a_in_b && m.contained.b_in_a;
    relaxed += m.contained.a_in_b || m.contained.b_in_a;
  }
  if (!gt.empty()) {
    r.sacc = static_cast<double>(strict) / static_cast<double>(gt.size());
    r.racc = static_cast<double>(relaxed) / static_cast<double>(gt.size());
    r.miou = iou_sum / static_cast<double>(gt.size());
  }
  if (options.miou_over_matched) {
    r.miou = r.matches.empty() ? 0.0 : iou_sum / static_cast<double>(r.matches.size());
  }
  return r;
}

}  // namespace

Containment containment(const LabeledBox& a, const LabeledBox& b) {
  return {contains_xy(b.box, a.centroid()), contains_xy(a.box, b.centroid())};
}

std::vector<ClassReport> per_class_report(const std::vector<LabeledBox>& pred,
                                          const std::vector<LabeledBox>& gt,
                                          const ReportOptions& options) {
  std::map<std::string, std::pair<std::vector<const LabeledBox*>, std::vector<const LabeledBox*>>>
      classes;
  for (const LabeledBox& b : pred) classes[b.label].first.push_back(&b);
  for (const LabeledBox& b : gt) classes[b.label].second.push_back(&b);

  std::vector<ClassReport> out;
  for (auto& [label, lists] : classes) {
    // Canonical per-class order keeps match indices input-order independent.
    for (auto* list : {&lists.first, &lists.second}) {
      std::sort(list->begin(), list->end(), [](const LabeledBox* a, const LabeledBox* b) {
        return key_of(a->box) < key_of(b->box);
      });
    }
    out.push_back(report_for_class(label, lists.first, lists.second, options));
  }
  return out;
}

// --- boxes.json ---------------------------------------------------------------

namespace {

using nlohmann::json;

Vec3 vec3_field(const json& item, const char* key, std::size_t i) {
  const std::string where = "boxes[" + std::to_string(i) + "]." + key;
  if (!item.contains(key) || !item.at(key).is_array() || item.at(key).size() != 3) {
    throw Error(ErrorCode::kSchema, where + ": expected [x, y, z]");
  }
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    const json& c = item.at(key)[k];
    if (!c.is_number()) throw Error(ErrorCode::kSchema, where + ": non-numeric coordinate");
    v[k] = c.get<double>();
  }
  return v;
}

}  // namespace

std::vector<LabeledBox> boxes_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("boxes JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::kSchema, "boxes JSON must be an array");
  std::vector<LabeledBox> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    if (!item.is_object() || !item.contains("label") || !item.at("label").is_string()) {
      throw Error(ErrorCode::kSchema, "boxes[" + std::to_string(i) + "].label: missing");
    }
    LabeledBox b{item.at("label").get<std::string>(), {vec3_field(item, "min", i), vec3_field(item, "max", i)}};
    if ((b.box.min.array() > b.box.max.array()).any()) {
      throw Error(ErrorCode::kSchema, "boxes[" + std::to_string(i) + "]: min exceeds max");
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<LabeledBox> read_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return boxes_from_json(ss.str());
}

std::string boxes_to_json(const std::vector<LabeledBox>& boxes) {
  json doc = json::array();
  for (const LabeledBox& b : boxes) {
    doc.push_back({{"label", b.label},
                   {"min", {b.box.min.x(), b.box.min.y(), b.box.min.z()}},
                   {"max", {b.box.max.x(), b.box.max.y(), b.box.max.z()}}});
  }
  return doc.dump(2);
}

void write_boxes(const std::filesystem::path& path, const std::vector<LabeledBox>& boxes) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << boxes_to_json(boxes) << "\n";
}

std::vector<LabeledBox> boxes_from_scene(const SceneState& scene) {
  std::vector<LabeledBox> out;
  for (const PlacedAsset& p : scene.placed) out.push_back({p.label, world_bounds(p)});
  return out;
}

std::string report_to_json(const std::vector<ClassReport>& report, int indent) {
  json doc = json::array();
  for (const ClassReport& r : report) {
    doc.push_back({{"class", r.label},
                   {"mIoU", r.miou},
                   {"sAcc", r.sacc},
                   {"rAcc", r.racc},
                   {"n_pred", r.n_pred},
                   {"n_gt", r.n_gt}});
  }
  return doc.dump(indent);
}

std::string report_to_table(const std::vector<ClassReport>& report) {
  std::size_t width = 5;
  for (const ClassReport& r : report) width = std::max(width, r.label.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %6s  %6s  %6s  %9s\n", static_cast<int>(width), "class",
                "mIoU", "sAcc", "rAcc", "pred/gt");
  out += line;
  for (const ClassReport& r : report) {
    const std::string count = std::to_string(r.n_pred) + "/" + std::to_string(r.n_gt);
    std::snprintf(line, sizeof(line), "%-*s  %6.3f  %6.3f  %6.3f  %9s\n", static_cast<int>(width),
                  r.label.c_str(), r.miou, r.sacc, r.racc, count.c_str());
    out += line;
  }
  return out;
}

}  // namespace usdrecon
