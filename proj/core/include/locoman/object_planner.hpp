#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locoman/qp.hpp"
#include "locoman/types.hpp"

namespace locoman {

/// Task displacement to achieve: lift height [m] or door opening angle [rad],
/// measured from where the object was when the task started.
struct TaskCommand {
  TaskKind kind = TaskKind::Lift;
  double target = 0.0;
  double duration = 2.0;       // lift time, or door push time
  bool hold = true;
  double handle_duration = 1.0;  // DoorOpen: time allotted to turning the handle

  void validate() const;
};

/// Object state in the task layout. Lift: per-axis heights/velocities with
/// z last. DoorOpen: (handle angle, door angle) and their rates.
struct ObjectState {
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
  Eigen::VectorXd origin;      // positions when the task started
  double elapsed = 0.0;        // time since the task started [s]
  double release_time = -1.0;  // DoorOpen: elapsed time when the handle released, < 0 while latched

  static ObjectState at_rest(const Eigen::VectorXd& pos);
  [[nodiscard]] bool handle_released() const { return release_time >= 0.0; }
};

/// Linear first-order object model  A_m * dX/dt = f_mu + f_m.
struct ObjectDynamics {
  Eigen::VectorXd inertia;   // diagonal of A_m
  Eigen::VectorXd external;  // f_mu, evaluated at the current state
};

enum class ManipulationPhase { Lift, HandleTurn, DoorPush };
std::string to_string(ManipulationPhase p);

struct ObjectReference {
  std::vector<Eigen::VectorXd> pos;  // N+1
  std::vector<Eigen::VectorXd> vel;  // N+1
};

struct ManipulationPlan {
  ManipulationPhase phase = ManipulationPhase::Lift;
  double horizon_dt = 0.05;
  ObjectReference reference;
  std::vector<Eigen::VectorXd> states;     // planned velocities, N+1
  std::vector<Eigen::VectorXd> positions;  // integrated planned positions, N+1
  std::vector<Eigen::VectorXd> task_force; // generalized force per step (object layout), N
  std::vector<Vec3> force;                 // Cartesian force on the object at the grip, N
  std::vector<Vec3> grip_point;            // where the gripper must be, N+1
  std::vector<double> handle_angle;        // DoorOpen only: N+1 planned handle angles

  [[nodiscard]] int horizon() const { return static_cast<int>(force.size()); }
};

/// Raised when the planner QP cannot be solved; `family()` names the
/// constraint group at fault.
class PlannerInfeasible : public std::runtime_error {
 public:
  PlannerInfeasible(std::string family, const std::string& what)
      : std::runtime_error(what), family_(std::move(family)) {}
  [[nodiscard]] const std::string& family() const { return family_; }

 private:
  std::string family_;
};

struct PlannerSettings {
  double tracking_weight = 1e3;
  double force_weight = 1e-3;
  double position_gain = 4.0;  // [1/s] position error folded into the velocity reference
  double lift_force_max = 1500.0;
  double handle_torque_max = 20.0;
  double push_force_max = 200.0;
};

/// Object dynamics for the model's task layout; door friction opposes the
/// current motion, or the commanded direction when at rest.
ObjectDynamics object_dynamics(const ObjectModel& model, const ObjectState& state, const TaskCommand& cmd);

/// Trapezoidal velocity profile (25% accel, 25% decel) from 0 to `distance`.
struct TrapezoidSample {
  double pos;
  double vel;
};
TrapezoidSample trapezoid(double distance, double duration, double t);

ObjectReference make_reference(const TaskCommand& cmd, const ObjectModel& model, const ObjectState& current,
                               double dt, int horizon);

/// Grip location for a given door/handle configuration.
Vec3 door_grip_point(const DoorGeometry& door, double handle_angle, double door_angle, bool released);
/// Door leaf unit normal pointing in the opening direction.
Vec3 door_normal(double door_angle);
/// Horizontal unit vector along the door leaf, hinge to free edge.
Vec3 door_tangent(double door_angle);
/// Handle tangent direction for increasing handle angle.
Vec3 handle_tangent(double handle_angle);
/// Distance from the hinge and height at which the leaf is pushed once the handle releases.
double door_push_distance(const DoorGeometry& door);
double door_push_height(const DoorGeometry& door);

class ObjectPlanner {
 public:
  explicit ObjectPlanner(PlannerSettings settings = {});

  /// Solves the object-level MPC. For lifts, `current_grip` is where the
  /// object is held right now; door grip points come from the door geometry.
  ManipulationPlan plan(const TaskCommand& cmd, const ObjectModel& model, const ObjectState& current,
                        double dt, int horizon, const Vec3& current_grip = Vec3::Zero());

  [[nodiscard]] const PlannerSettings& settings() const { return settings_; }

 private:
  PlannerSettings settings_;
  QpSolver qp_;
  std::optional<QpWarmStart> warm_;
};

}  // namespace locoman
