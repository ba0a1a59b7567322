// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "usdrecon/evaluation/metrics.hpp"
#include "usdrecon/prompting/prompting.hpp"

namespace usdrecon {

struct SvgOptions {
  double pixels_per_meter = 60.0;
  double margin = 0.5;  ///< meters around the drawn content
  bool show_labels = true;
};

/// Top-down plot of xy boxes: predictions as filled rectangles, ground truth
/// dashed, optional waypoints as a numbered polyline. y points up.
std::string boxes_to_svg(const std::vector<LabeledBox>& pred, const std::vector<LabeledBox>& gt,
                         const std::vector<Waypoint>& waypoints = {},
                         const SvgOptions& options = {});

}  // namespace usdrecon
