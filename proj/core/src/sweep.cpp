#include "locoman/sweep.hpp"

#include <algorithm>
#include <stdexcept>

namespace locoman {

void set_pose_weight(PoseWeights& w, const std::string& key, double value) {
  const std::string k = key.rfind("pose.", 0) == 0 ? key.substr(5) : key;
  if (k == "w_height") w.w_height = value;
  else if (k == "w_euler") w.w_euler.head<2>().setConstant(value);
  else if (k == "w_roll") w.w_euler.x() = value;
  else if (k == "w_pitch") w.w_euler.y() = value;
  else if (k == "w_yaw") w.w_euler.z() = value;
  else if (k == "w_torque") w.w_torque = value;
  else if (k == "w_reg_xy") w.w_reg_xy = value;
  else throw std::invalid_argument("unknown pose weight key '" + key + "'");
}

std::vector<SweepRow> run_pose_sweep(const PoseSweep& sweep, const RobotModel& model) {
  if (sweep.values.empty()) throw std::invalid_argument("sweep needs at least one value");
  PoseWeights probe = sweep.base;
  set_pose_weight(probe, sweep.key, 1.0);  // reject a bad key before any solve

  PoseDecision start;
  start.pos = Vec3(sweep.target.anchor_xy.x(), sweep.target.anchor_xy.y(), sweep.target.ref_height);
  start.euler.z() = sweep.target.ref_yaw;
  std::vector<SweepRow> rows;
  for (double v : sweep.values) {
    PoseWeights w = sweep.base;
    set_pose_weight(w, sweep.key, v);
    SweepRow row;
    row.value = v;
    row.result = solve_pose(sweep.target, w, model, start);
    for (const PoseViolation& viol : pose_violations(row.result.pose, sweep.target, model))
      row.violation = std::max(row.violation, viol.amount);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace locoman
