#ifndef GWL_SVG_PLOT_HPP
#define GWL_SVG_PLOT_HPP

#include <string>
#include <vector>

#include "gwl/oracle.hpp"

namespace gwl {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Visited bins only: x = bin centre, y = s.
PlotSeries series_from_table(const EntropyTable& table, std::string label);

// Standalone SVG 1.1 line chart with axes, tick labels and one polyline per
// series. Throws InvalidArgument if every series is empty.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                       const std::string& x_label = "output", const std::string& y_label = "entropy S (nats)");

}  // namespace gwl

#endif  // GWL_SVG_PLOT_HPP
