#pragma once

#include <string>
#include <vector>

#include "kvrobin/experiment.hpp"

namespace kvrobin {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::string annotation;
};

/// Static SVG 1.1 line chart; identical inputs give identical bytes.
std::string line_chart_svg(const ChartSpec& spec, const std::vector<Series>& series);

std::string history_svg(const std::vector<HistoryRow>& rows, bool error_panel);
std::string reconstruction_svg(const RobinCoefficient& q_star, const RobinCoefficient& q_dag);
std::string sweep_svg(const std::vector<std::pair<double, double>>& medians, const std::optional<RateFit>& rate);

}  // namespace kvrobin
