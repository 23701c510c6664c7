#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ladder {

struct LineSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
};

/// Minimal standalone SVG line plot with framed axes and tick labels.
void write_line_plot(const std::filesystem::path& path, const std::vector<LineSeries>& series,
                     const std::string& x_label, const std::string& y_label);

}  // namespace ladder
