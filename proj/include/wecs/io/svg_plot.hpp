#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wecs::io {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct PlotPanel {
  std::string title;
  std::string ylabel;
  std::vector<PlotSeries> series;
};

/// Vertically stacked line plots sharing one x axis, as a standalone SVG.
std::string render_svg(const std::vector<PlotPanel>& panels, const std::string& xlabel,
                       int width = 900, int panel_height = 170);

void write_svg(const std::filesystem::path& path, const std::vector<PlotPanel>& panels,
               const std::string& xlabel);

}  // namespace wecs::io
