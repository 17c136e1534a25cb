#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edgecache {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Static SVG 1.1 line chart, one polyline per series, at most max_points
// vertices each. Throws std::invalid_argument on empty input.
std::string render_svg(std::span<const PlotSeries> series, std::size_t max_points = 1000);

// Collects rewards.csv files below dir; runs of one algorithm are averaged
// trial by trial over their common length.
std::vector<PlotSeries> load_reward_series(const std::filesystem::path& dir);

}  // namespace edgecache
