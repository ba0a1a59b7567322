// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "usdrecon/reconciliation/scene.hpp"

namespace usdrecon {

struct LabeledBox {
  std::string label;
  Aabb box;
  Vec3 centroid() const { return box.center(); }
};

/// Intersection over union of the xy projections; 0 when the union is empty.
double iou_xy(const Aabb& a, const Aabb& b);

struct Containment {
  bool a_in_b = false;  ///< a's centroid lies in b's closed xy box
  bool b_in_a = false;
};
Containment containment(const LabeledBox& a, const LabeledBox& b);

struct MatchedPair {
  std::size_t pred;
  std::size_t gt;
  double iou;
  Containment contained;
};

struct ClassReport {
  std::string label;
  double miou = 0.0;
  double sacc = 0.0;
  double racc = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  std::vector<MatchedPair> matches;  ///< indices into the class's own boxes
};

struct ReportOptions {
  /// Average IoU over matched pairs instead of over all ground truth.
  bool miou_over_matched = false;
};

/// One-to-one matching inside each class: greedy by descending xy IoU (only
/// IoU > 0), then leftover pairs with at least one centroid contained, nearest
/// centroids first. Ties are broken on box coordinates so the report does not
/// depend on input order. Classes are sorted by label.
std::vector<ClassReport> per_class_report(const std::vector<LabeledBox>& pred,
                                          const std::vector<LabeledBox>& gt,
                                          const ReportOptions& options = {});

std::vector<LabeledBox> read_boxes(const std::filesystem::path& path);
std::vector<LabeledBox> boxes_from_json(std::string_view text);
std::string boxes_to_json(const std::vector<LabeledBox>& boxes);
void write_boxes(const std::filesystem::path& path, const std::vector<LabeledBox>& boxes);

/// Predicted boxes of a reconstruction: label and world bounds per placement.
std::vector<LabeledBox> boxes_from_scene(const SceneState& scene);

std::string report_to_json(const std::vector<ClassReport>& report, int indent = 2);
/// Aligned columns: class, mIoU, sAcc, rAcc, pred/gt.
std::string report_to_table(const std::vector<ClassReport>& report);

}  // namespace usdrecon
