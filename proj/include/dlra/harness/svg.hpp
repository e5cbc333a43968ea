#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dlra/harness/csv.hpp"

namespace dlra {

enum class PlotKind { convergence, norm_drift, heatmap };

inline PlotKind plot_kind_from_string(const std::string& name) {
  if (name == "convergence") return PlotKind::convergence;
  if (name == "norm-drift" || name == "norm_drift") return PlotKind::norm_drift;
  if (name == "heatmap") return PlotKind::heatmap;
  throw InvalidInput("unknown plot kind: " + name);
}

namespace svg_detail {

inline std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

// five-stop colormap on [0, 1]
inline std::string colormap(double u) {
  static const double stops[5][3] = {{0x44, 0x01, 0x54},
                                     {0x3b, 0x52, 0x8b},
                                     {0x21, 0x91, 0x8c},
                                     {0x5e, 0xc9, 0x62},
                                     {0xfd, 0xe7, 0x25}};
  u = std::clamp(u, 0.0, 1.0);
  const double pos = u * 4.0;
  const int lo = std::min(3, static_cast<int>(pos));
  const double w = pos - lo;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(stops[lo][0] * (1 - w) + stops[lo + 1][0] * w),
                static_cast<int>(stops[lo][1] * (1 - w) + stops[lo + 1][1] * w),
                static_cast<int>(stops[lo][2] * (1 - w) + stops[lo + 1][2] * w));
  return buf;
}

struct LogLogSeries {
  std::string label;
  std::vector<double> h;
  std::vector<double> value;
};

inline std::string render_loglog(const std::vector<LogLogSeries>& series,
                                 const std::string& y_label) {
  DLRA_REQUIRE(!series.empty(), "render_plot: empty table");
  const double width = 640, height = 480, margin = 60;

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.h.size(); ++i) {
      if (s.value[i] <= 0.0 || s.h[i] <= 0.0) continue;
      x_lo = std::min(x_lo, std::log10(s.h[i]));
      x_hi = std::max(x_hi, std::log10(s.h[i]));
      y_lo = std::min(y_lo, std::log10(s.value[i]));
      y_hi = std::max(y_hi, std::log10(s.value[i]));
    }
  }
  DLRA_REQUIRE(x_lo <= x_hi && y_lo <= y_hi,
               "render_plot: no positive data points");
  if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
  if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
  const double pad_x = 0.05 * (x_hi - x_lo), pad_y = 0.05 * (y_hi - y_lo);
  x_lo -= pad_x;
  x_hi += pad_x;
  y_lo -= pad_y;
  y_hi += pad_y;

  auto px = [&](double logx) {
    return margin + (logx - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
  };
  auto py = [&](double logy) {
    return height - margin -
           (logy - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      << "width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
      << width - 2 * margin << "\" height=\"" << height - 2 * margin
      << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\" font-size=\"14\">h</text>\n";
  out << "<text x=\"18\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 "
         "18 "
      << height / 2 << ")\">" << y_label << "</text>\n";

  // order guide lines anchored at the lower-left data corner
  for (int order = 1; order <= 4; ++order) {
    const double y_right = y_lo + pad_y + order * ((x_hi - pad_x) - (x_lo + pad_x));
    out << "<polyline fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"4 "
           "3\" points=\""
        << coord(px(x_lo + pad_x)) << "," << coord(py(y_lo + pad_y)) << " "
        << coord(px(x_hi - pad_x)) << "," << coord(py(std::min(y_right, y_hi)))
        << "\"/>\n";
    out << "<text x=\"" << coord(px(x_hi - pad_x) + 4) << "\" y=\""
        << coord(py(std::min(y_right, y_hi))) << "\" font-size=\"10\" "
        << "fill=\"#999999\">" << order << "</text>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < series[s].h.size(); ++i) {
      if (series[s].value[i] <= 0.0) continue;
      pts << coord(px(std::log10(series[s].h[i]))) << ","
          << coord(py(std::log10(series[s].value[i]))) << " ";
    }
    out << "<polyline fill=\"none\" stroke=\"" << series_color(s)
        << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    out << "<text x=\"" << margin + 8 << "\" y=\"" << margin + 16 + 14 * s
        << "\" font-size=\"11\" fill=\"" << series_color(s) << "\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string render_heatmap(
    const std::vector<std::array<double, 3>>& cells) {
  DLRA_REQUIRE(!cells.empty(), "render_plot: empty table");
  std::set<double> xs, ys;
  double phi_max = -1e300;
  double phi_min_pos = 1e300;
  for (const auto& c : cells) {
    xs.insert(c[0]);
    ys.insert(c[1]);
    phi_max = std::max(phi_max, c[2]);
    if (c[2] > 0.0) phi_min_pos = std::min(phi_min_pos, c[2]);
  }
  const bool any_positive = phi_min_pos < 1e300 && phi_max > 0.0;
  // log10 color range, clipped to at most 7 decades below the maximum
  const double log_hi = any_positive ? std::log10(phi_max) : 0.0;
  const double log_lo =
      any_positive ? std::max(std::log10(phi_min_pos), log_hi - 7.0) : -1.0;

  const double width = 560, height = 560, margin = 40;
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double x0 = *xs.begin(), x1 = *xs.rbegin();
  const double y0 = *ys.begin(), y1 = *ys.rbegin();
  const double cw = (width - 2 * margin) / nx;
  const double ch = (height - 2 * margin) / ny;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      << "width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  for (const auto& c : cells) {
    const double fx = nx > 1 ? (c[0] - x0) / (x1 - x0) : 0.0;
    const double fy = ny > 1 ? (c[1] - y0) / (y1 - y0) : 0.0;
    std::string fill = "#ffffff";  // negative and zero values stay white
    if (c[2] > 0.0 && any_positive) {
      const double u = (std::log10(c[2]) - log_lo) / (log_hi - log_lo);
      fill = colormap(u);
    }
    out << "<rect x=\"" << coord(margin + fx * (nx - 1) * cw) << "\" y=\""
        << coord(height - margin - ch - fy * (ny - 1) * ch) << "\" width=\""
        << coord(cw + 0.5) << "\" height=\"" << coord(ch + 0.5)
        << "\" fill=\"" << fill << "\"/>\n";
  }
  out << "<text x=\"" << margin << "\" y=\"" << margin - 12
      << "\" font-size=\"12\">log10 scale, max " << format_double(phi_max)
      << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace svg_detail

/// Renders a CSV produced by the study runners into a standalone SVG.
/// convergence/norm-drift: log-log series per (variant, rank) with order
/// guide lines; heatmap: x,y,phi cells on a log10 color scale, negative
/// values white.
inline void render_plot(const std::filesystem::path& csv_path, PlotKind kind,
                        const std::filesystem::path& out_svg) {
  const auto rows = read_csv(csv_path);
  DLRA_REQUIRE(rows.size() >= 2, "render_plot: empty table");

  std::string content;
  if (kind == PlotKind::heatmap) {
    std::vector<std::array<double, 3>> cells;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      DLRA_REQUIRE(rows[i].size() >= 3, "render_plot: bad heatmap row");
      cells.push_back({std::stod(rows[i][0]), std::stod(rows[i][1]),
                       std::stod(rows[i][2])});
    }
    content = svg_detail::render_heatmap(cells);
  } else {
    std::map<std::string, std::size_t> index;
    std::vector<svg_detail::LogLogSeries> series;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      DLRA_REQUIRE(rows[i].size() >= 4, "render_plot: bad series row");
      const std::string label = rows[i][0] + " r=" + rows[i][1];
      auto [it, inserted] = index.emplace(label, series.size());
      if (inserted) series.push_back({label, {}, {}});
      auto& s = series[it->second];
      s.h.push_back(std::stod(rows[i][2]));
      s.value.push_back(std::stod(rows[i][3]));
    }
    content = svg_detail::render_loglog(
        series, kind == PlotKind::convergence ? "relative error" : "norm drift");
  }

  std::filesystem::create_directories(out_svg.parent_path());
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw NumericalError("cannot write SVG: " + out_svg.string());
  out << content;
}

}  // namespace dlra
