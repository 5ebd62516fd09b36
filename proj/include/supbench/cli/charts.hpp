#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace supbench::cli {

// One polyline on the ablation chart. Detection curves are drawn solid,
// localization curves dashed, matching the paper's figure convention.
struct ChartSeries {
  std::string label;
  std::string color = "#1f77b4";  // "#rrggbb"
  bool dashed = false;
  std::vector<std::pair<double, double>> points;  // (x, y), both in [0, 1]
};

// Writes the chart as SVG and as a rasterized PNG fallback next to it.
// Both axes span [0, 1]; the x axis is labeled in percent.
void write_chart_svg(const std::filesystem::path& path,
                     const std::string& title,
                     const std::vector<ChartSeries>& series);
void write_chart_png(const std::filesystem::path& path,
                     const std::string& title,
                     const std::vector<ChartSeries>& series);

}  // namespace supbench::cli
