#include "edgecache/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "edgecache/errors.hpp"

namespace edgecache {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, std::size_t max_points) {
  if (series.empty()) throw std::invalid_argument("nothing to plot");
  if (max_points < 2) throw std::invalid_argument("need at least two points per series");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const PlotSeries& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw std::invalid_argument("series " + s.name + " is empty or ragged");
    }
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!std::isfinite(x0) || !std::isfinite(y0)) {
    throw std::invalid_argument("no finite points to plot");
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\""
      << fmt(kLeft + pw) << "\" y2=\"" << fmt(kTop + ph) << "\"/>\n"
      << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
      << "\" y2=\"" << fmt(kTop + ph) << "\"/>\n"
      << "</g>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    svg << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(kTop + ph + 16)
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n"
        << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">trial</text>\n"
      << "<text x=\"18\" y=\"" << fmt(kTop + ph / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << fmt(kTop + ph / 2) << ")\">average reward</text>\n"
      << "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    const std::size_t stride = (s.x.size() + max_points - 1) / max_points;
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < s.x.size(); k += stride) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      svg << (first ? "" : " ") << fmt(px(s.x[k])) << ',' << fmt(py(s.y[k]));
      first = false;
    }
    const std::size_t last = s.x.size() - 1;
    if (last % stride != 0 && std::isfinite(s.x[last]) && std::isfinite(s.y[last])) {
      svg << (first ? "" : " ") << fmt(px(s.x[last])) << ',' << fmt(py(s.y[last]));
    }
    svg << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << fmt(kLeft + pw + 15) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(kLeft + pw + 40) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fmt(kLeft + pw + 46) << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<PlotSeries> load_reward_series(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "rewards.csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<std::string> order;
  std::map<std::string, std::vector<PlotSeries>> runs;
  for (const fs::path& path : files) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "trial,time,action,hit,instant_reward,avg_reward,algorithm") {
      throw FormatError(path.string() + ": unexpected rewards header");
    }
    PlotSeries s;
    long row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      const auto cols = split(line);
      if (cols.size() != 7) throw ParseError(row, path.string() + ": expected 7 fields");
      try {
        s.x.push_back(std::stod(cols[0]));
        s.y.push_back(std::stod(cols[5]));
      } catch (const std::exception&) {
        throw ParseError(row, path.string() + ": bad number");
      }
      s.name = cols[6];
    }
    if (s.x.empty()) continue;
    if (!runs.count(s.name)) order.push_back(s.name);
    runs[s.name].push_back(std::move(s));
  }

  std::vector<PlotSeries> out;
  for (const std::string& name : order) {
    const auto& group = runs[name];
    std::size_t n = group.front().x.size();
    for (const auto& s : group) n = std::min(n, s.x.size());
    PlotSeries mean{name, {group.front().x.begin(), group.front().x.begin() + static_cast<long>(n)},
                    std::vector<double>(n, 0.0)};
    for (const auto& s : group) {
      for (std::size_t k = 0; k < n; ++k) mean.y[k] += s.y[k] / static_cast<double>(group.size());
    }
    out.push_back(std::move(mean));
  }
  return out;
}

}  // namespace edgecache
