#pragma once

#include <string>
#include <vector>

#include "locoman/pose_optimizer.hpp"

namespace locoman {

/// One weight varied over a list of values, everything else held fixed.
struct PoseSweep {
  PoseTarget target;
  PoseWeights base;
  std::string key;  // w_height, w_euler (roll and pitch), w_roll, w_pitch, w_yaw, w_torque, w_reg_xy
  std::vector<double> values;
};

struct SweepRow {
  double value = 0.0;
  PoseResult result;
  double violation = 0.0;  // worst constraint residual of the returned pose
};

/// Sets one named weight. Throws std::invalid_argument for an unknown key.
void set_pose_weight(PoseWeights& weights, const std::string& key, double value);

/// Solves each pose from the nominal stance, in value order. Throws
/// std::invalid_argument on an empty value list or unknown key, and lets
/// PoseInfeasible through.
std::vector<SweepRow> run_pose_sweep(const PoseSweep& sweep, const RobotModel& model);

}  // namespace locoman
