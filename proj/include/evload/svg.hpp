#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "evload/numeric.hpp"

namespace evload::svg {

struct Series {
  std::string name;
  std::vector<double> values;
};

/// Static line chart: x is the sample index, y is auto-scaled from zero.
inline std::string line_chart(const std::string& title, const std::vector<Series>& series,
                              int width = 640, int height = 360) {
  static constexpr const char* kColors[] = {"#636efa", "#ef553b", "#00cc96", "#ab63fa",
                                            "#ffa15a", "#19d3f3", "#ff6692", "#b6e880"};
  const double left = 48, right = 16, top = 32, bottom = 32;
  std::size_t n = 0;
  double ymax = 0.0;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) ymax = std::max(ymax, v);
  }
  if (ymax <= 0.0) ymax = 1.0;
  const double pw = width - left - right, ph = height - top - bottom;
  auto xpos = [&](std::size_t i) { return left + (n > 1 ? pw * i / double(n - 1) : 0.0); };
  auto ypos = [&](double v) { return top + ph * (1.0 - v / ymax); };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + std::to_string(int(left)) + "\" y=\"20\" font-family=\"sans-serif\" "
         "font-size=\"14\">" + title + "</text>\n";
  out += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top + ph) + "\" x2=\"" +
         format_double(left + pw) + "\" y2=\"" + format_double(top + ph) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top) + "\" x2=\"" +
         format_double(left) + "\" y2=\"" + format_double(top + ph) + "\" stroke=\"black\"/>\n";
  out += "<text x=\"4\" y=\"" + format_double(top + 4) + "\" font-family=\"sans-serif\" "
         "font-size=\"10\">" + format_double(ymax) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % 8];
    std::string points;
    for (std::size_t i = 0; i < series[k].values.size(); ++i)
      points += format_double(xpos(i)) + "," + format_double(ypos(series[k].values[i])) + " ";
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" "
           "points=\"" + points + "\"/>\n";
    out += "<text x=\"" + format_double(left + pw - 150) + "\" y=\"" +
           std::to_string(int(top + 14 * (k + 1))) + "\" font-family=\"sans-serif\" font-size=\"10\" "
           "fill=\"" + color + "\">" + series[k].name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace evload::svg
