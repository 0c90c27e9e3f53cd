#include "echolock/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "echolock/errors.hpp"
#include "echolock/number_format.hpp"

namespace echolock {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

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

// 1-2-5 tick spacing giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range {
  double lo;
  double hi;
};

Range padded(double lo, double hi) {
  if (hi - lo <= 0.0) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

std::string px(double v) { return format_fixed(v, 2); }

std::string tick_label(double v, double step) {
  const int digits = std::clamp(static_cast<int>(-std::floor(std::log10(step))), 0, 6);
  return format_fixed(v, digits);
}

}  // namespace

std::string emit_svg(std::span<const Series> series, const PlotStyle& style) {
  if (series.empty()) throw ConfigError("emit_svg: no series to plot");
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const Series& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw ConfigError("emit_svg: series '" + s.name +
                        "' is empty or has mismatched x/y lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) throw ConfigError("emit_svg: no finite points");
  const Range xr = padded(xmin, xmax);
  const Range yr = padded(ymin, ymax);

  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = style.width - left - right;
  const double ph = style.height - top - bottom;
  auto sx = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double y) { return top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
    << style.width << "\" height=\"" << style.height << "\" viewBox=\"0 0 "
    << style.width << ' ' << style.height << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    o << "<text x=\"" << px(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(style.title)
      << "</text>\n";
  }
  o << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw)
    << "\" height=\"" << px(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  o << "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\">\n";
  const double xs = nice_step(xr.hi - xr.lo, 8);
  for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi + 1e-9 * xs; v += xs) {
    o << "<line x1=\"" << px(sx(v)) << "\" y1=\"" << px(top + ph) << "\" x2=\""
      << px(sx(v)) << "\" y2=\"" << px(top + ph + 5) << "\" stroke=\"black\"/>"
      << "<text x=\"" << px(sx(v)) << "\" y=\"" << px(top + ph + 18)
      << "\" text-anchor=\"middle\">" << tick_label(v, xs) << "</text>\n";
  }
  const double ys = nice_step(yr.hi - yr.lo, 6);
  for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi + 1e-9 * ys; v += ys) {
    o << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(sy(v)) << "\" x2=\""
      << px(left) << "\" y2=\"" << px(sy(v)) << "\" stroke=\"black\"/>"
      << "<text x=\"" << px(left - 8) << "\" y=\"" << px(sy(v) + 4)
      << "\" text-anchor=\"end\">" << tick_label(v, ys) << "</text>\n";
  }
  o << "</g>\n";

  o << "<text class=\"axis-label\" x=\"" << px(left + pw / 2) << "\" y=\""
    << px(style.height - 15.0) << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"13\">" << escape(style.x_label)
    << "</text>\n"
    << "<text class=\"axis-label\" x=\"18\" y=\"" << px(top + ph / 2)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
    << "transform=\"rotate(-90 18 " << px(top + ph / 2) << ")\">"
    << escape(style.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    o << "<polyline fill=\"none\" stroke=\"" << kPalette[k % std::size(kPalette)]
      << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << px(sx(s.x[i])) << ',' << px(sy(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
  }

  o << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = top + 10 + 18.0 * k;
    o << "<line x1=\"" << px(left + pw + 12) << "\" y1=\"" << px(y) << "\" x2=\""
      << px(left + pw + 36) << "\" y2=\"" << px(y) << "\" stroke=\""
      << kPalette[k % std::size(kPalette)] << "\" stroke-width=\"2\"/>"
      << "<text x=\"" << px(left + pw + 42) << "\" y=\"" << px(y + 4) << "\">"
      << escape(series[k].name) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace echolock
