#pragma once

#include <string>
#include <vector>

namespace bowden {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  bool markers = false;
};

/// Static line chart with axes, ticks and a legend.
std::string line_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace bowden
