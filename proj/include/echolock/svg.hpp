#pragma once

#include <span>
#include <string>
#include <vector>

namespace echolock {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 800;
  int height = 480;
};

/// Standalone SVG 1.1 line chart: one polyline per series, axes with tick
/// labels, axis titles and a legend. Output depends only on the input, byte
/// for byte. Throws ConfigError if there is no series, a series is empty, or
/// x and y lengths differ.
std::string emit_svg(std::span<const Series> series, const PlotStyle& style);

}  // namespace echolock
