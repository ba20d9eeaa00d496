// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qilens {

// Minimal self-contained SVG line/scatter plot, enough for trace and g(t)
// figures without a display dependency.
class SvgPlot {
public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  // Scatter points with optional symmetric error bars.
  void add_points(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& yerr, const std::string& color,
                  const std::string& label);
  // Connected line (model overlays).
  void add_line(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color, const std::string& label);

  void write(const std::filesystem::path& path) const;

private:
  struct Series {
    std::vector<double> x, y, yerr;
    std::string color;
    std::string label;
    bool line = false;
  };

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace qilens
