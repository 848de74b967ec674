// Copyright 2026 The HetNAS Authors
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

#include "plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace hetnas::plot {

namespace {

constexpr double kWidth = 640, kHeight = 360, kLeft = 60, kRight = 20, kTop = 40, kBottom = 90;
const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << esc(title)
     << "</text>\n";
}

}  // namespace

std::string bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars) {
  std::ostringstream os;
  open_svg(os, title);
  double lo = 0.0, hi = 0.0;
  for (const auto& b : bars) {
    lo = std::min(lo, b.second);
    hi = std::max(hi, b.second);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double plot_h = kHeight - kTop - kBottom, plot_w = kWidth - kLeft - kRight;
  auto y_of = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  const double zero = y_of(0.0);
  os << "<line x1=\"" << kLeft << "\" y1=\"" << zero << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << zero
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kLeft - 4 << "\" y=\"" << y_of(hi) + 4 << "\" text-anchor=\"end\">" << num(hi) << "</text>\n";
  os << "<text x=\"" << kLeft - 4 << "\" y=\"" << y_of(lo) + 4 << "\" text-anchor=\"end\">" << num(lo) << "</text>\n";
  const double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double y = std::min(zero, y_of(bars[i].second));
    const double h = std::abs(y_of(bars[i].second) - zero);
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << slot * 0.7 << "\" height=\"" << h
       << "\" fill=\"" << kPalette[i % 10] << "\"/>\n";
    const double lx = x + slot * 0.35, ly = kHeight - kBottom + 12;
    os << "<text x=\"" << lx << "\" y=\"" << ly << "\" text-anchor=\"end\" transform=\"rotate(-45 " << lx << ' '
       << ly << ")\">" << esc(bars[i].first) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::map<std::string, std::vector<std::pair<double, double>>>& series) {
  std::ostringstream os;
  open_svg(os, title);
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& [name, pts] : series) {
    for (const auto& [x, y] : pts) {
      if (first) {
        x0 = x1 = x;
        y0 = y1 = y;
        first = false;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;
  const double plot_h = kHeight - kTop - kBottom, plot_w = kWidth - kLeft - kRight;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * plot_w; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * plot_h; };
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << kLeft - 4 << "\" y=\"" << py(y1) + 4 << "\" text-anchor=\"end\">" << num(y1) << "</text>\n";
  os << "<text x=\"" << kLeft - 4 << "\" y=\"" << py(y0) + 4 << "\" text-anchor=\"end\">" << num(y0) << "</text>\n";
  os << "<text x=\"" << px(x0) << "\" y=\"" << kTop + plot_h + 14 << "\">" << num(x0) << "</text>\n";
  os << "<text x=\"" << px(x1) << "\" y=\"" << kTop + plot_h + 14 << "\" text-anchor=\"end\">" << num(x1)
     << "</text>\n";
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kTop + plot_h + 30 << "\" text-anchor=\"middle\">"
     << esc(x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 14 " << kTop + plot_h / 2
     << ")\" text-anchor=\"middle\">" << esc(y_label) << "</text>\n";
  std::size_t i = 0;
  for (const auto& [name, pts] : series) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 10] << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << kLeft + 8 << "\" y=\"" << kHeight - kBottom + 50 + 14.0 * static_cast<double>(i)
       << "\" fill=\"" << kPalette[i % 10] << "\">" << esc(name) << "</text>\n";
    ++i;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace hetnas::plot
