#pragma once

// Output helpers for the command-line tool: key=value blocks and a small
// static SVG line chart (one polyline per series, legend, axis labels).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bnp/calibrate.hpp"
#include "bnp/error.hpp"

namespace bnp {

using KeyValues = std::vector<std::pair<std::string, double>>;

// Integral values (counts) print without exponent.
inline void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    out << key << '=';
    if (value == std::trunc(value) && std::abs(value) < 1e15) {
      out << static_cast<long long>(value);
    } else {
      out << detail::format_double(value);
    }
    out << '\n';
  }
}

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

struct ChartLabels {
  std::string title;
  std::string x_label;
  std::string y_label;
};

namespace detail {

inline std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v == 0.0 ? 0.0 : v);
  return buf;
}

// Roughly `count` round tick values covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int count = 6) {
  const double span = hi - lo;
  const double raw = span / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
  return ticks;
}

inline std::string tick_label(double v, double step) {
  const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  return fixed(v, std::min(digits, 6));
}

}  // namespace detail

inline void write_svg_chart(std::ostream& out, const ChartLabels& labels, const std::vector<ChartSeries>& series) {
  detail::require(!series.empty(), Errc::DomainError, "chart needs at least one series");
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    detail::require(s.x.size() == s.y.size() && !s.x.empty(), Errc::DimensionMismatch,
                    "series coordinates must be aligned and non-empty");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      detail::require(std::isfinite(s.x[i]) && std::isfinite(s.y[i]), Errc::DomainError,
                      "chart coordinates must be finite");
      x_lo = std::min(x_lo, s.x[i]), x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]), y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (x_hi == x_lo) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad, y_hi += pad;

  constexpr double width = 900, height = 500;
  constexpr double left = 80, right = 30, top = 50, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
      << detail::xml_escape(labels.title) << "</text>\n";

  const auto xt = detail::nice_ticks(x_lo, x_hi);
  const auto yt = detail::nice_ticks(y_lo, y_hi);
  const double xstep = xt.size() > 1 ? xt[1] - xt[0] : 1.0;
  const double ystep = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
  out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t : xt) {
    out << "<line x1=\"" << detail::fixed(px(t)) << "\" y1=\"" << top << "\" x2=\"" << detail::fixed(px(t))
        << "\" y2=\"" << top + plot_h << "\"/>\n";
  }
  for (double t : yt) {
    out << "<line x1=\"" << left << "\" y1=\"" << detail::fixed(py(t)) << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << detail::fixed(py(t)) << "\"/>\n";
  }
  out << "</g>\n<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n<g text-anchor=\"middle\">\n";
  for (double t : xt) {
    out << "<text x=\"" << detail::fixed(px(t)) << "\" y=\"" << top + plot_h + 18 << "\">"
        << detail::tick_label(t, xstep) << "</text>\n";
  }
  out << "</g>\n<g text-anchor=\"end\">\n";
  for (double t : yt) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << detail::fixed(py(t) + 4) << "\">"
        << detail::tick_label(t, ystep) << "</text>\n";
  }
  out << "</g>\n"
      << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << detail::xml_escape(labels.x_label) << "</text>\n"
      << "<text x=\"20\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << top + plot_h / 2 << ")\">" << detail::xml_escape(labels.y_label) << "</text>\n";

  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << detail::xml_escape(s.color) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << ' ';
      out << detail::fixed(px(s.x[i])) << ',' << detail::fixed(py(s.y[i]));
    }
    out << "\"><title>" << detail::xml_escape(s.name) << "</title></polyline>\n";
  }

  out << "<g font-size=\"12\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 15 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << left + 12 << "\" y1=\"" << y << "\" x2=\"" << left + 40 << "\" y2=\"" << y
        << "\" stroke=\"" << detail::xml_escape(series[i].color) << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << left + 46 << "\" y=\"" << y + 4 << "\">" << detail::xml_escape(series[i].name)
        << "</text>\n";
  }
  out << "</g>\n</svg>\n";
}

}  // namespace bnp
