#pragma once

#include <string>
#include <vector>

#include "locoman/pose_optimizer.hpp"

namespace locoman::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Time-series chart with axes, ticks and a legend. No timestamps or ids, so
/// the same data gives the same bytes.
std::string line_plot_svg(const LinePlot& plot);

/// Side view of a pose: ground, trunk, legs to the ground, arm and grip point.
std::string pose_svg(const PoseDecision& pose, const Vec3& grip, const RobotModel& model, const std::string& title);

}  // namespace locoman::cli
