#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locoman/nlp.hpp"
#include "locoman/object_planner.hpp"
#include "locoman/types.hpp"

namespace locoman {

/// One whole-body pose: CoM position, body orientation, arm angle and the
/// force the gripper applies to the object.
struct PoseDecision {
  Vec3 pos = Vec3(0.0, 0.0, 0.4);
  Vec3 euler = Vec3::Zero();
  double q_arm = 0.0;
  Vec3 manip_force = Vec3::Zero();

  static constexpr int kSize = 10;
  [[nodiscard]] Eigen::Matrix<double, kSize, 1> to_vector() const;
  static PoseDecision from_vector(const Eigen::VectorXd& x);
};

struct PoseWeights {
  double w_height = 1e3;
  Vec3 w_euler = Vec3(1e3, 1e3, 1e2);
  double w_torque = 1e-2;
  double w_reg_xy = 1e-2;

  void validate() const;
  [[nodiscard]] PoseWeights scaled(double c) const;
};

/// Task-side inputs to one pose solve.
struct PoseTarget {
  Vec3 grip = Vec3::Zero();    // required end-effector position
  Vec3 force = Vec3::Zero();   // planned force on the object
  double ref_height = 0.4;
  double ref_yaw = 0.0;        // yaw is penalized relative to this
  Eigen::Vector2d anchor_xy = Eigen::Vector2d::Zero();  // CoM x-y regularization centre
  std::optional<double> roll;  // handle turn: body roll follows the handle
  std::optional<DoorGeometry> door;  // adds the door-frame clearance inequality
};

struct PoseResult {
  PoseDecision pose;
  SolveStatus status = SolveStatus::MaxIter;
  double cost = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  bool degraded = false;  // solver stopped early but the pose is within feasibility tolerance
};

class PoseInfeasible : public std::runtime_error {
 public:
  PoseInfeasible(std::string family, int step, const std::string& what)
      : std::runtime_error(what), family_(std::move(family)), step_(step) {}
  [[nodiscard]] const std::string& family() const { return family_; }
  /// Horizon index of the failing solve, -1 for a single solve.
  [[nodiscard]] int step() const { return step_; }

 private:
  std::string family_;
  int step_;
};

inline constexpr double kPoseFeasTol = 1e-5;

/// Signed horizontal distance between the trunk bounding circle and the
/// door-frame half-plane x <= frame_x; negative when penetrating.
double door_clearance_constraint(const PoseDecision& pose, const DoorGeometry& door);

/// Arm joint torque J(q)' f for the pose's own force.
double arm_torque(const PoseDecision& pose, const RobotModel& model);

double pose_cost(const PoseDecision& pose, const PoseTarget& target, const PoseWeights& weights,
                 const RobotModel& model);

/// Per-family constraint violation (0 when satisfied), keyed by family name.
struct PoseViolation {
  std::string family;
  double amount = 0.0;
};
std::vector<PoseViolation> pose_violations(const PoseDecision& pose, const PoseTarget& target, const RobotModel& model);

/// Solves the pose NLP from `x0`. Throws PoseInfeasible naming the most
/// violated constraint family when no feasible pose is found.
PoseResult solve_pose(const PoseTarget& target, const PoseWeights& weights, const RobotModel& model,
                      const PoseDecision& x0, const NlpOptions& options = {});

/// Extra context a pose trajectory needs beyond the plan itself.
struct PoseContext {
  double ref_height = 0.4;
  std::optional<DoorGeometry> door;
};

struct PoseTrajectory {
  std::vector<PoseDecision> poses;    // N+1
  std::vector<RobotState> reference;  // N+1
  bool degraded = false;
};

/// Runs one pose solve per plan step, each warm-started from the previous
/// one, and differentiates the poses into a state reference. Throws
/// PoseInfeasible carrying the failing step index.
PoseTrajectory build_reference_trajectory(const ManipulationPlan& plan, const RobotState& current, double q_arm,
                                          const PoseWeights& weights, const RobotModel& model,
                                          const PoseContext& context = {}, const NlpOptions& options = {});

}  // namespace locoman
