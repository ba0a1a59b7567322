// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/evaluation/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Fixed palette, assigned to labels in sorted order so plots are stable.
const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string boxes_to_svg(const std::vector<LabeledBox>& pred, const std::vector<LabeledBox>& gt,
                         const std::vector<Waypoint>& waypoints, const SvgOptions& options) {
  if (!(options.pixels_per_meter > 0.0) || !(options.margin >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "svg scale must be positive and margin non-negative");
  }
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  bool any = false;
  auto grow = [&](double x, double y) {
    if (!any) {
      x0 = x1 = x;
      y0 = y1 = y;
      any = true;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  std::map<std::string, const char*> colors;
  for (const auto* set : {&pred, &gt}) {
    for (const LabeledBox& b : *set) {
      grow(b.box.min.x(), b.box.min.y());
      grow(b.box.max.x(), b.box.max.y());
      colors[b.label] = nullptr;
    }
  }
  for (const Waypoint& w : waypoints) grow(w.position.x(), w.position.y());
  std::size_t k = 0;
  for (auto& [label, color] : colors) color = kPalette[k++ % std::size(kPalette)];

  x0 -= options.margin;
  y0 -= options.margin;
  x1 += options.margin;
  y1 += options.margin;
  const double s = options.pixels_per_meter;
  const double width = (x1 - x0) * s;
  const double height = (y1 - y0) * s;
  auto px = [&](double x) { return (x - x0) * s; };
  auto py = [&](double y) { return (y1 - y) * s; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // 1 m grid
  out << "  <g stroke=\"#eeeeee\" stroke-width=\"1\">\n";
  for (double x = std::ceil(x0); x <= x1; x += 1.0) {
    out << "    <line x1=\"" << num(px(x)) << "\" y1=\"0\" x2=\"" << num(px(x)) << "\" y2=\"" << num(height)
        << "\"/>\n";
  }
  for (double y = std::ceil(y0); y <= y1; y += 1.0) {
    out << "    <line x1=\"0\" y1=\"" << num(py(y)) << "\" x2=\"" << num(width) << "\" y2=\"" << num(py(y))
        << "\"/>\n";
  }
  out << "  </g>\n";

  auto rect = [&](const LabeledBox& b, bool truth) {
    const char* color = colors[b.label];
    out << "    <rect x=\"" << num(px(b.box.min.x())) << "\" y=\"" << num(py(b.box.max.y())) << "\" width=\""
        << num((b.box.max.x() - b.box.min.x()) * s) << "\" height=\"" << num((b.box.max.y() - b.box.min.y()) * s)
        << "\" stroke=\"" << color << '"';
    if (truth) {
      out << " fill=\"none\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    } else {
      out << " fill=\"" << color << "\" fill-opacity=\"0.35\" stroke-width=\"1.5\"/>\n";
    }
  };
  out << "  <g id=\"ground_truth\">\n";
  for (const LabeledBox& b : gt) rect(b, true);
  out << "  </g>\n  <g id=\"predicted\">\n";
  for (const LabeledBox& b : pred) rect(b, false);
  out << "  </g>\n";
  if (options.show_labels) {
    out << "  <g id=\"labels\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (const LabeledBox& b : pred) {
      out << "    <text x=\"" << num(px(b.box.min.x()) + 2) << "\" y=\"" << num(py(b.box.max.y()) - 3)
          << "\">" << escape(b.label) << "</text>\n";
    }
    out << "  </g>\n";
  }
  if (!waypoints.empty()) {
    out << "  <g id=\"waypoints\">\n    <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
      out << (i ? " " : "") << num(px(waypoints[i].position.x())) << ',' << num(py(waypoints[i].position.y()));
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
      const double cx = px(waypoints[i].position.x());
      const double cy = py(waypoints[i].position.y());
      out << "    <circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"4\" fill=\"black\"/>\n";
      out << "    <text x=\"" << num(cx + 5) << "\" y=\"" << num(cy - 5)
          << "\" font-family=\"sans-serif\" font-size=\"10\">" << i << "</text>\n";
    }
    out << "  </g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace usdrecon
