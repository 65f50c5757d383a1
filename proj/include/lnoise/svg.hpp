#pragma once

#include <string>
#include <vector>

namespace lnoise {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct ChartOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = true;
  int width = 640;
  int height = 420;
};

/// Line chart as a standalone SVG document. Nonpositive values are dropped on log axes.
std::string line_chart_svg(const std::vector<Series>& series, const ChartOptions& opt);

}  // namespace lnoise
