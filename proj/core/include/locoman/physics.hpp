#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "locoman/object_planner.hpp"
#include "locoman/types.hpp"

namespace locoman {

enum class FootMode { Stance, Swing };

/// The manipulated object as the plant sees it. A lift object is welded to
/// the gripper; a door is driven by whatever force the gripper applies.
struct SimObject {
  bool present = false;
  ObjectModel model;
  ObjectState state;             // task layout, as consumed by the object planner
  Vec3 grip = Vec3::Zero();      // Lift: world position of the held point
  Vec3 grip_vel = Vec3::Zero();
};

struct SimWorld {
  RobotState robot;
  SimObject object;
  std::array<Vec3, kNumLegs> foot_pos{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<FootMode, kNumLegs> foot_mode{FootMode::Stance, FootMode::Stance, FootMode::Stance, FootMode::Stance};
  double q_arm = 0.0;
  double dq_arm = 0.0;
  double time = 0.0;
  // Interaction during the last step: force on the object, and the reaction on the robot.
  Vec3 object_force = Vec3::Zero();
  Vec3 manip_reaction = Vec3::Zero();
};

/// Joint-space PD tracking for the arm; without one the arm joint coasts.
struct ArmCommand {
  double q_ref = 0.0;
  double dq_ref = 0.0;
  double kp = 1600.0;
  double kd = 80.0;
};

class SimulationAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Places a lift object at the current end effector, at rest.
void attach_lift_object(SimWorld& world, const ObjectModel& object, const RobotModel& model);

/// One plant step. Ground forces act at stance feet only; `u.manip_force` is
/// the gripper force on the robot for a door (the door gets its negative) and
/// is ignored for a held lift object, whose interaction force comes from the
/// rigid grasp. Throws SimulationAbort on a non-finite state.
SimWorld step_physics(const SimWorld& world, const ControlInput& u, double dt, const RobotModel& model,
                      const std::optional<ArmCommand>& arm = std::nullopt);

/// Kinetic plus gravitational energy of robot and object (door spring included).
double mechanical_energy(const SimWorld& world, const RobotModel& model);

/// Robot plus held-object linear momentum.
Vec3 linear_momentum(const SimWorld& world, const RobotModel& model);

/// World velocity of the end effector.
Vec3 end_effector_velocity(const SimWorld& world, const RobotModel& model);

}  // namespace locoman
