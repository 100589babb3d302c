#include "dass/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dass/errors.hpp"

namespace dass {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 70;

const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                         "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};

double nice_max(const std::vector<PlotSeries>& series) {
  double m = 0;
  for (const auto& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) m = std::max(m, v);
  if (m <= 1.0) return 1.0;
  return std::pow(10.0, std::ceil(std::log10(m)));
}

void open_svg(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << kHeight << "' viewBox='0 0 " << kWidth << " " << kHeight
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='16'>" << title << "</text>\n";
}

void axes_and_grid(std::ostringstream& svg, double y_max) {
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  for (int i = 0; i <= 5; ++i) {
    const double frac = i / 5.0;
    const double y = y0 - frac * (y0 - y1);
    svg << "<line x1='" << x0 << "' y1='" << y << "' x2='" << x1 << "' y2='" << y
        << "' stroke='#dddddd'/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%.2f", frac * y_max);
    svg << "<text x='" << x0 - 6 << "' y='" << y + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << label
        << "</text>\n";
  }
  svg << "<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x1 << "' y2='" << y0
      << "' stroke='black'/>\n<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x0
      << "' y2='" << y1 << "' stroke='black'/>\n";
}

void legend(std::ostringstream& svg, const std::vector<PlotSeries>& series) {
  int x = kMarginLeft + 8;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 8];
    svg << "<rect x='" << x << "' y='" << kMarginTop - 10 << "' width='12' height='12' fill='"
        << color << "'/>\n<text x='" << x + 16 << "' y='" << kMarginTop + 1
        << "' font-family='sans-serif' font-size='12'>" << series[s].name
        << "</text>\n";
    x += 22 + static_cast<int>(series[s].name.size()) * 7;
  }
}

void write_svg(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write plot: " + path.string());
  out << body;
}

}  // namespace

void write_bar_chart_svg(const std::filesystem::path& path,
                         const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<PlotSeries>& series) {
  const double y_max = nice_max(series);
  std::ostringstream svg;
  open_svg(svg, title);
  axes_and_grid(svg, y_max);
  legend(svg, series);

  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  const double group_w =
      static_cast<double>(x1 - x0) / std::max<std::size_t>(1, labels.size());
  const double bar_w = group_w * 0.8 / std::max<std::size_t>(1, series.size());

  for (std::size_t g = 0; g < labels.size(); ++g) {
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (g >= series[s].values.size()) continue;
      const double v = std::max(0.0, series[s].values[g]);
      const double h = (v / y_max) * (y0 - y1);
      const double x = x0 + group_w * static_cast<double>(g) + group_w * 0.1 +
                       bar_w * static_cast<double>(s);
      svg << "<rect x='" << x << "' y='" << y0 - h << "' width='" << bar_w
          << "' height='" << h << "' fill='" << kColors[s % 8] << "'/>\n";
    }
    const double cx = x0 + group_w * (static_cast<double>(g) + 0.5);
    svg << "<text x='" << cx << "' y='" << y0 + 16
        << "' text-anchor='middle' font-family='sans-serif' font-size='11' "
        << "transform='rotate(25 " << cx << " " << y0 + 16 << ")'>" << labels[g]
        << "</text>\n";
  }
  svg << "</svg>\n";
  write_svg(path, svg.str());
}

void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title, const std::vector<double>& x,
                          const std::vector<PlotSeries>& series,
                          const std::string& x_label, const std::string& y_label) {
  const double y_max = nice_max(series);
  double x_min = x.empty() ? 0 : x.front(), x_max = x.empty() ? 1 : x.back();
  for (double v : x) {
    x_min = std::min(x_min, v);
    x_max = std::max(x_max, v);
  }
  if (x_max == x_min) x_max = x_min + 1;

  std::ostringstream svg;
  open_svg(svg, title);
  axes_and_grid(svg, y_max);
  legend(svg, series);

  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  const auto px = [&](double v) {
    return x0 + (v - x_min) / (x_max - x_min) * (x1 - x0);
  };
  const auto py = [&](double v) { return y0 - (v / y_max) * (y0 - y1); };

  for (double v : x) {
    char label[32];
    std::snprintf(label, sizeof(label), "%g", v);
    svg << "<text x='" << px(v) << "' y='" << y0 + 16
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << label << "</text>\n";
  }
  if (!x_label.empty())
    svg << "<text x='" << (x0 + x1) / 2 << "' y='" << kHeight - 14
        << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
        << x_label << "</text>\n";
  if (!y_label.empty())
    svg << "<text x='16' y='" << (y0 + y1) / 2
        << "' text-anchor='middle' font-family='sans-serif' font-size='12' "
        << "transform='rotate(-90 16 " << (y0 + y1) / 2 << ")'>" << y_label
        << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    svg << "<polyline fill='none' stroke='" << kColors[s % 8]
        << "' stroke-width='2' points='";
    for (std::size_t i = 0; i < x.size() && i < series[s].values.size(); ++i)
      svg << px(x[i]) << "," << py(series[s].values[i]) << " ";
    svg << "'/>\n";
    for (std::size_t i = 0; i < x.size() && i < series[s].values.size(); ++i)
      svg << "<circle cx='" << px(x[i]) << "' cy='" << py(series[s].values[i])
          << "' r='3' fill='" << kColors[s % 8] << "'/>\n";
  }
  svg << "</svg>\n";
  write_svg(path, svg.str());
}

}  // namespace dass
