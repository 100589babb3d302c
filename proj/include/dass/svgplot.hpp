#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dass {

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

// Grouped bar chart, one bar group per label. Values are clamped to [0, 1]
// scale when max <= 1, otherwise auto-scaled.
void write_bar_chart_svg(const std::filesystem::path& path,
                         const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<PlotSeries>& series);

// Line chart over shared x positions.
void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title,
                          const std::vector<double>& x,
                          const std::vector<PlotSeries>& series,
                          const std::string& x_label = "",
                          const std::string& y_label = "");

}  // namespace dass
