#pragma once

#include <string>
#include <vector>

namespace qrelay {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal SVG line chart; one polyline per series with a small legend.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

// Minimal SVG heat map of a row-major nx*ny field.
void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label, int nx, int ny,
                   const std::vector<double>& values, double x_min, double x_max,
                   double y_min, double y_max);

}  // namespace qrelay
