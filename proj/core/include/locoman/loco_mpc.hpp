#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locoman/gait.hpp"
#include "locoman/qp.hpp"
#include "locoman/types.hpp"

namespace locoman {

struct MpcConfig {
  int horizon_N = 10;
  double horizon_T = 0.5;
  StateVector state_weights = default_state_weights();
  InputVector input_weights = InputVector::Constant(1e-4);
  ControllerKind kind = ControllerKind::Full;
  QpSettings qp{1e-7, 4000};

  [[nodiscard]] double dt() const { return horizon_T / horizon_N; }
  void validate() const;
  static StateVector default_state_weights();
};

/// Continuous-time prediction model x' = A x + B u in the RobotState /
/// ControlInput layouts.
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

/// Linearized single-rigid-body model about the current yaw and contact
/// geometry. Euler rates use the yaw-only map; the gripper force enters like a
/// fifth contact at `grip_pos`.
StateSpace build_state_space(double yaw, const std::array<Vec3, kNumLegs>& foot_pos, const Vec3& grip_pos,
                             const Vec3& com, const RobotModel& model, const Vec3& euler);

/// Second-order series discretization: A_d = I + A dt + A^2 dt^2 / 2,
/// B_d = (I dt + A dt^2 / 2) B.
StateSpace discretize(const StateSpace& continuous, double dt);

/// Five rows per foot: f_x -/+ mu f_z, f_y -/+ mu f_z, and the f_z bounds,
/// written as lower <= C f <= upper.
struct PyramidRows {
  Eigen::Matrix<double, 5, 3> c;
  Eigen::Matrix<double, 5, 1> lower;
  Eigen::Matrix<double, 5, 1> upper;
};
PyramidRows friction_pyramid(double mu, const Range& fz_bounds);

struct MpcSolution {
  std::vector<ControlInput> inputs;     // N
  std::vector<RobotState> predicted;    // N+1
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
  bool degraded = false;  // solver hit its iteration budget; inputs are the best iterate
};

class MpcInfeasible : public std::runtime_error {
 public:
  MpcInfeasible(std::string family, const std::string& what)
      : std::runtime_error(what), family_(std::move(family)) {}
  [[nodiscard]] const std::string& family() const { return family_; }

 private:
  std::string family_;
};

/// Inputs to one MPC solve. `manip_force` holds the per-step force acting on
/// the robot at the gripper; Baseline ignores it entirely.
struct MpcProblem {
  RobotState x0;
  std::vector<RobotState> reference;  // N+1, entry 0 unused by the cost
  std::vector<StanceFlags> stance;    // N
  std::array<Vec3, kNumLegs> foot_pos{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  Vec3 grip_pos = Vec3::Zero();
  std::vector<Vec3> manip_force;      // N
};

/// Whole-body MPC. Swing-foot forces and the gripper force are fixed inputs,
/// so the QP decision vector is the stance-foot forces over the horizon.
class LocoMpc {
 public:
  explicit LocoMpc(MpcConfig config = {});

  MpcSolution solve(const MpcProblem& problem, const RobotModel& model);

  [[nodiscard]] const MpcConfig& config() const { return config_; }

 private:
  MpcConfig config_;
  QpSolver qp_;
  std::optional<QpWarmStart> warm_;
};

MpcSolution solve_mpc(const MpcProblem& problem, const MpcConfig& config, const RobotModel& model);

}  // namespace locoman
