#include "wecs/io/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "wecs/error.hpp"

namespace wecs::io {
namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
constexpr size_t kMaxPoints = 3000;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<PlotPanel>& panels, const std::string& xlabel,
                       int width, int panel_height) {
  const int left = 80, right = 20, top = 28, gap = 40, bottom = 40;
  const int height = static_cast<int>(panels.size()) * (panel_height + gap) + bottom;
  const double plot_w = width - left - right;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (const auto& p : panels)
    for (const auto& s : p.series)
      for (double x : s.x) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
      }
  if (!(xmax > xmin)) {
    xmin = 0.0;
    xmax = 1.0;
  }

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) +
                    "\" font-family=\"sans-serif\" font-size=\"11\">\n"
                    "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t pi = 0; pi < panels.size(); ++pi) {
    const PlotPanel& panel = panels[pi];
    const double y0 = top + pi * (panel_height + gap);
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& s : panel.series)
      for (double y : s.y)
        if (std::isfinite(y)) {
          ymin = std::min(ymin, y);
          ymax = std::max(ymax, y);
        }
    if (!(ymax > ymin)) {
      const double c = std::isfinite(ymin) ? ymin : 0.0;
      ymin = c - 1.0;
      ymax = c + 1.0;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    const auto py = [&](double y) { return y0 + panel_height - (y - ymin) / (ymax - ymin) * panel_height; };

    out += "<text x=\"" + num(left) + "\" y=\"" + num(y0 - 8) + "\" font-weight=\"bold\">" +
           escape(panel.title) + "</text>\n";
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(y0) + "\" width=\"" + num(plot_w) +
           "\" height=\"" + std::to_string(panel_height) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double yv = ymin + (ymax - ymin) * t / 4.0;
      out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(yv) + 4) +
             "\" text-anchor=\"end\">" + tick(yv) + "</text>\n";
      const double xv = xmin + (xmax - xmin) * t / 4.0;
      out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(y0 + panel_height + 14) +
             "\" text-anchor=\"middle\">" + tick(xv) + "</text>\n";
    }
    out += "<text transform=\"translate(16," + num(y0 + panel_height / 2.0) +
           ") rotate(-90)\" text-anchor=\"middle\">" + escape(panel.ylabel) + "</text>\n";
    for (size_t si = 0; si < panel.series.size(); ++si) {
      const PlotSeries& s = panel.series[si];
      const size_t n = std::min(s.x.size(), s.y.size());
      const size_t stride = std::max<size_t>(1, n / kMaxPoints);
      std::string pts;
      for (size_t i = 0; i < n; i += stride)
        if (std::isfinite(s.y[i])) pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
      const char* color = kColors[si % (sizeof kColors / sizeof *kColors)];
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
      if (!s.label.empty())
        out += "<text x=\"" + num(left + plot_w - 4) + "\" y=\"" + num(y0 + 14 + 13 * si) +
               "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(s.label) + "</text>\n";
    }
  }
  out += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(height - 8) +
         "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n</svg>\n";
  return out;
}

void write_svg(const std::filesystem::path& path, const std::vector<PlotPanel>& panels,
               const std::string& xlabel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << render_svg(panels, xlabel);
}

}  // namespace wecs::io
