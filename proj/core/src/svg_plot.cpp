#include "qrelay/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qrelay {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void expand(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_line_chart: cannot open " + path);

  Range xr{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
  Range yr = xr;
  for (const auto& s : series) {
    for (const double v : s.x) xr.expand(v);
    for (const double v : s.y) yr.expand(v);
  }
  if (xr.lo >= xr.hi) xr.hi = xr.lo + 1.0;
  if (yr.lo >= yr.hi) yr.hi = yr.lo + 1.0;
  const double ypad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const double pw = kWidth - kMarginLeft - kMarginRight;
  const double ph = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) { return kMarginLeft + pw * (x - xr.lo) / (xr.hi - xr.lo); };
  auto sy = [&](double y) { return kMarginTop + ph * (1.0 - (y - yr.lo) / (yr.hi - yr.lo)); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
     << title << "</text>\n";

  // axes and ticks
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xr.lo + k * (xr.hi - xr.lo) / 5.0;
    const double yv = yr.lo + k * (yr.hi - yr.lo) / 5.0;
    os << "<line x1=\"" << sx(xv) << "\" y1=\"" << kMarginTop + ph << "\" x2=\"" << sx(xv)
       << "\" y2=\"" << kMarginTop + ph + 4 << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << sx(xv) << "\" y=\"" << kMarginTop + ph + 18
       << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    os << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << sy(yv) << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << sy(yv) << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << sy(yv) + 4
       << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << kMarginTop + ph / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kMarginTop + ph / 2 << ")\">"
     << y_label << "</text>\n";

  int color = 0;
  for (const auto& s : series) {
    const char* stroke = kPalette[color % 6];
    os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      os << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << kMarginLeft + 10 << "\" y=\"" << kMarginTop + 16 + 16 * color
       << "\" fill=\"" << stroke << "\">" << s.name << "</text>\n";
    ++color;
  }
  os << "</svg>\n";
}

void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label, int nx, int ny,
                   const std::vector<double>& values, double x_min, double x_max,
                   double y_min, double y_max) {
  if (values.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw std::invalid_argument("write_heatmap: size mismatch");
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_heatmap: cannot open " + path);

  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (const double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo >= hi) hi = lo + 1.0;

  const double pw = kWidth - kMarginLeft - kMarginRight;
  const double ph = kHeight - kMarginTop - kMarginBottom;
  const double cw = pw / nx;
  const double ch = ph / ny;

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
     << title << " (" << fmt(lo) << " to " << fmt(hi) << ")</text>\n";

  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const double v = values[static_cast<std::size_t>(ix) * static_cast<std::size_t>(ny) +
                              static_cast<std::size_t>(iy)];
      const double t = (v - lo) / (hi - lo);
      // dark blue -> yellow ramp
      const int r = static_cast<int>(255 * t);
      const int g = static_cast<int>(32 + 200 * t);
      const int b = static_cast<int>(96 + 120 * (1.0 - t));
      os << "<rect x=\"" << fmt(kMarginLeft + ix * cw) << "\" y=\""
         << fmt(kMarginTop + ph - (iy + 1) * ch) << "\" width=\"" << fmt(cw + 0.5)
         << "\" height=\"" << fmt(ch + 0.5) << "\" fill=\"rgb(" << r << ',' << g << ',' << b
         << ")\"/>\n";
    }
  }
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
  os << "<text x=\"" << kMarginLeft << "\" y=\"" << kMarginTop + ph + 18 << "\">" << fmt(x_min)
     << "</text>\n";
  os << "<text x=\"" << kMarginLeft + pw << "\" y=\"" << kMarginTop + ph + 18
     << "\" text-anchor=\"end\">" << fmt(x_max) << "</text>\n";
  os << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << kMarginTop + ph
     << "\" text-anchor=\"end\">" << fmt(y_min) << "</text>\n";
  os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << kMarginTop + 10
     << "\" text-anchor=\"end\">" << fmt(y_max) << "</text>\n";
  os << "<text x=\"18\" y=\"" << kMarginTop + ph / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kMarginTop + ph / 2 << ")\">"
     << y_label << "</text>\n";
  os << "</svg>\n";
}

}  // namespace qrelay
