// Copyright 2026 the hop-predict authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "hop/csv.hpp"

namespace hop {

/// One polyline of a chart.
struct SvgSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Self-contained SVG line chart (hand-written paths, no plotting
/// dependency). Intended for regret-vs-step curves.
inline std::string render_line_chart(const std::string& title,
                                     const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<SvgSeries>& series) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double width = 920, height = 560;
  const double left = 70, right = 30, top = 50, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (first) {
        x_min = x_max = s.xs[i];
        y_min = y_max = s.ys[i];
        first = false;
      }
      x_min = std::min(x_min, s.xs[i]);
      x_max = std::max(x_max, s.xs[i]);
      y_min = std::min(y_min, s.ys[i]);
      y_max = std::max(y_max, s.ys[i]);
    }
  if (x_max <= x_min) x_max = x_min + 1;
  if (y_max <= y_min) y_max = y_min + 1;

  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width
      << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-size=\"16\">" << title << "</text>\n";

  // Axes and ticks.
  out << "<g stroke=\"#333\" stroke-width=\"1\">";
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h << "\"/>";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h << "\"/></g>\n";
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = x_min + (x_max - x_min) * t / ticks;
    const double fy = y_min + (y_max - y_min) * t / ticks;
    out << "<line x1=\"" << sx(fx) << "\" y1=\"" << top + plot_h << "\" x2=\""
        << sx(fx) << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"#333\"/>";
    out << "<text x=\"" << sx(fx) << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\">" << format_double(fx, 4) << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\""
        << left << "\" y2=\"" << sy(fy) << "\" stroke=\"#333\"/>";
    out << "<text x=\"" << left - 9 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\">" << format_double(fy, 4) << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<path fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" d=\"";
    for (std::size_t i = 0; i < series[s].xs.size(); ++i)
      out << (i == 0 ? 'M' : 'L') << format_double(sx(series[s].xs[i]), 6) << ' '
          << format_double(sy(series[s].ys[i]), 6);
    out << "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << left + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
        << left + plot_w - 120 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>";
    out << "<text x=\"" << left + plot_w - 112 << "\" y=\"" << ly + 4 << "\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace hop
