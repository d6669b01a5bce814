#pragma once

#include <string>
#include <vector>

namespace panelcp {

// Minimal deterministic SVG line plots; everything plotted here is also
// available in the CSV outputs.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

}  // namespace panelcp
