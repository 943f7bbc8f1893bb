#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locoman/gait.hpp"
#include "locoman/loco_mpc.hpp"
#include "locoman/object_planner.hpp"
#include "locoman/pose_optimizer.hpp"
#include "locoman/types.hpp"

namespace locoman {

struct ScenarioConfig {
  std::string name = "scenario";
  std::optional<TaskCommand> task;  // none: hold the nominal stance
  ObjectModel object;
  ControllerKind controller_kind = ControllerKind::Full;
  GaitSchedule gait;
  PoseWeights pose_weights;
  MpcConfig mpc;
  PlannerSettings planner;
  RobotModel robot;
  double duration = 5.0;
  std::uint64_t seed = 0;
  double initial_noise = 0.0;  // uniform start perturbation [m, rad] drawn from `seed`

  double stand_height = 0.4;
  Eigen::Vector2d start_xy = Eigen::Vector2d::Zero();
  double start_yaw = 0.0;
  double q_arm0 = 0.4;
  double front_foot_shift = 0.0;  // stance feet offset along body x from under the hips
  double rear_foot_shift = 0.0;
  Vec3 vel_cmd = Vec3::Zero();    // base velocity command for stepping gaits without a task
  double swing_height = 0.08;
  double raibert_gain = 0.03;

  double physics_dt = 1e-3;
  double control_rate = 30.0;
  double tip_limit = 1.0;  // roll or pitch beyond this counts as a fall [rad]

  std::string trace_path;    // empty: not written
  std::string summary_path;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TraceRow {
  double time = 0.0;
  RobotState state;
  RobotState reference;
  ControlInput input;
  double q_arm = 0.0;
  double q_arm_ref = 0.0;
  Eigen::VectorXd object_pos;
  Eigen::VectorXd object_vel;
  StanceFlags stance{true, true, true, true};
  bool planner_degraded = false;
  bool pose_degraded = false;
  bool mpc_degraded = false;
};

struct RunMetrics {
  double com_height_rmse = 0.0;
  double pitch_rmse = 0.0;
  double max_pitch = 0.0;
  double max_height_error = 0.0;
  bool fell = false;
  bool aborted = false;  // the plant diverged; counted as a fall
  std::string abort_reason;

  int ticks = 0;
  int planner_failures = 0;
  int pose_failures = 0;
  int mpc_failures = 0;
  int degraded_ticks = 0;  // any stage running on a fallback or an early-stopped solve
  double wall_time = 0.0;  // [s], excluded from the trace

  // Task progress. Lift: height gained. DoorOpen: door angle.
  double object_final = 0.0;
  double object_target = 0.0;
  double handle_release_time = -1.0;  // DoorOpen
  double target80_time = -1.0;        // first time the task reached 80% of its target
  double min_pose_clearance = 0.0;    // DoorOpen: over every reference pose
  double max_push_tangential = 0.0;   // DoorOpen: largest non-normal push component [N]

  std::vector<TraceRow> trace;
};

RunMetrics run_scenario(const ScenarioConfig& config);

}  // namespace locoman
