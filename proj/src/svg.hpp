#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcgen/pointcloud.hpp"

namespace pcgen {

// Static scatter plot of clouds as a grid of XY orthographic panels
// (`cols` panels per row). Each panel is a <g> group of <circle> marks with
// the cloud's label (or index) as a caption. Deterministic byte output.
std::string svg_cloud_grid(const std::vector<PointCloud>& clouds, int cols);

// Line chart of one or more named series over a shared x index (0..n-1),
// one <polyline class="series"> per entry plus a legend. Deterministic byte
// output; empty series are skipped.
std::string svg_line_chart(
    const std::vector<std::pair<std::string, std::vector<double>>>& series,
    const std::string& title);

}  // namespace pcgen
