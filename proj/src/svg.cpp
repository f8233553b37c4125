#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

constexpr int kPanel = 160;   // px per panel, including padding
constexpr int kPad = 12;      // inner padding
constexpr double kDot = 1.5;  // point radius

void appendf(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

}  // namespace

std::string svg_cloud_grid(const std::vector<PointCloud>& clouds, int cols) {
  if (cols < 1) {
    throw config_error("svg_cloud_grid: cols must be >= 1");
  }
  const int n = static_cast<int>(clouds.size());
  const int used_cols = std::min(cols, std::max(n, 1));
  const int rows = n == 0 ? 0 : (n + used_cols - 1) / used_cols;
  const int width = used_cols * kPanel;
  const int height = std::max(rows, 1) * kPanel;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int i = 0; i < n; ++i) {
    const PointCloud& cloud = clouds[static_cast<std::size_t>(i)];
    const int px = (i % used_cols) * kPanel;
    const int py = (i / used_cols) * kPanel;

    // Per-panel bounds over the XY projection keep each cloud readable.
    double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
    if (!cloud.points.empty()) {
      lo_x = hi_x = cloud.points.front()[0];
      lo_y = hi_y = cloud.points.front()[1];
      for (const Point3& p : cloud.points) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
      }
    }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    const double scale = (kPanel - 2.0 * kPad) / span;
    const double cx = (lo_x + hi_x) / 2.0, cy = (lo_y + hi_y) / 2.0;

    svg += "<g class=\"cloud\">\n";
    svg += "<rect x=\"" + std::to_string(px + 1) + "\" y=\"" +
           std::to_string(py + 1) + "\" width=\"" + std::to_string(kPanel - 2) +
           "\" height=\"" + std::to_string(kPanel - 2) +
           "\" fill=\"none\" stroke=\"#ccc\"/>\n";
    for (const Point3& p : cloud.points) {
      const double x = px + kPanel / 2.0 + (p[0] - cx) * scale;
      const double y = py + kPanel / 2.0 - (p[1] - cy) * scale;  // y up
      svg += "<circle cx=\"";
      appendf(svg, "%.2f", x);
      svg += "\" cy=\"";
      appendf(svg, "%.2f", y);
      svg += "\" r=\"";
      appendf(svg, "%.2f", kDot);
      svg += "\" fill=\"#1b6ca8\"/>\n";
    }
    const std::string caption =
        cloud.label.empty() ? "#" + std::to_string(i) : cloud.label;
    svg += "<text x=\"" + std::to_string(px + kPad) + "\" y=\"" +
           std::to_string(py + kPanel - 4) +
           "\" font-family=\"monospace\" font-size=\"10\">" + caption +
           "</text>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string svg_line_chart(
    const std::vector<std::pair<std::string, std::vector<double>>>& series,
    const std::string& title) {
  constexpr int kW = 640, kH = 360, kMargin = 40;
  static const char* kColors[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad"};

  // Shared y range over all finite samples.
  double lo = 0.0, hi = 0.0;
  bool any = false;
  std::size_t max_len = 0;
  for (const auto& [name, values] : series) {
    max_len = std::max(max_len, values.size());
    for (double v : values) {
      if (!std::isfinite(v)) {
        continue;
      }
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  if (hi - lo < 1e-12) {
    hi = lo + 1.0;
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(kW) + "\" height=\"" + std::to_string(kH) +
         "\" viewBox=\"0 0 " + std::to_string(kW) + " " + std::to_string(kH) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + std::to_string(kMargin) + "\" y=\"" +
         std::to_string(kMargin) + "\" width=\"" +
         std::to_string(kW - 2 * kMargin) + "\" height=\"" +
         std::to_string(kH - 2 * kMargin) +
         "\" fill=\"none\" stroke=\"#999\"/>\n";
  svg += "<text x=\"" + std::to_string(kMargin) +
         "\" y=\"24\" font-family=\"monospace\" font-size=\"13\">" + title +
         "</text>\n";

  int color = 0;
  for (const auto& [name, values] : series) {
    if (values.empty()) {
      continue;
    }
    const char* stroke = kColors[color % 4];
    const double dx = max_len > 1
                          ? (kW - 2.0 * kMargin) / (double(max_len) - 1.0)
                          : 0.0;
    svg += "<polyline class=\"series\" fill=\"none\" stroke=\"";
    svg += stroke;
    svg += "\" points=\"";
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = std::isfinite(values[i]) ? values[i] : lo;
      const double x = kMargin + double(i) * dx;
      const double y =
          kH - kMargin - (v - lo) / (hi - lo) * (kH - 2.0 * kMargin);
      if (i) {
        svg += ' ';
      }
      appendf(svg, "%.2f", x);
      svg += ',';
      appendf(svg, "%.2f", y);
    }
    svg += "\"/>\n";
    svg += "<text x=\"" + std::to_string(kMargin + 6) + "\" y=\"" +
           std::to_string(kMargin + 16 + 14 * color) +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"";
    svg += stroke;
    svg += "\">" + name + "</text>\n";
    ++color;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace pcgen
