#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace locoman {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kNumLegs = 4;
inline constexpr int kStateDim = 13;
inline constexpr int kInputDim = 15;
inline constexpr double kDefaultGravity = 9.81;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using InputVector = Eigen::Matrix<double, kInputDim, 1>;

/// Leg ordering used throughout: front-right, front-left, rear-right, rear-left.
enum class Leg : int { FR = 0, FL = 1, RR = 2, RL = 3 };

struct Range {
  double min = 0.0;
  double max = 0.0;

  [[nodiscard]] bool contains(double v) const { return v >= min && v <= max; }
  [[nodiscard]] double clamp(double v) const { return v < min ? min : (v > max ? max : v); }
};

/// Rigid-body state in the layout used by the MPC prediction model:
/// [roll pitch yaw | px py pz | wx wy wz | vx vy vz | g].
struct RobotState {
  Vec3 euler = Vec3::Zero();  // ZYX angles stored as (roll, pitch, yaw)
  Vec3 pos = Vec3::Zero();
  Vec3 omega = Vec3::Zero();  // world frame
  Vec3 vel = Vec3::Zero();
  double grav = kDefaultGravity;

  [[nodiscard]] StateVector to_vector() const;
  static RobotState from_vector(const StateVector& x);
  [[nodiscard]] bool finite() const;
};

/// Four ground reaction forces and the gripper interaction force, all world frame.
/// `manip_force` is the force acting on the robot at the gripper, so an object
/// being held up shows up as a downward (negative z) entry.
struct ControlInput {
  std::array<Vec3, kNumLegs> foot_force{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  Vec3 manip_force = Vec3::Zero();

  [[nodiscard]] InputVector to_vector() const;
  static ControlInput from_vector(const InputVector& u);
  [[nodiscard]] bool finite() const;
};

struct RobotModel {
  double mass = 16.5;
  Mat3 inertia_body = Eigen::Vector3d(0.17, 0.55, 0.58).asDiagonal();
  std::array<Vec3, kNumLegs> hip_offset{Vec3(0.24, -0.13, 0.0), Vec3(0.24, 0.13, 0.0),
                                        Vec3(-0.24, -0.13, 0.0), Vec3(-0.24, 0.13, 0.0)};
  Vec3 arm_mount = Vec3(0.2, 0.0, 0.05);
  double arm_length = 0.6;
  Range arm_limits{-0.7, 2.4};
  double mu = 0.6;
  Range fz_bounds{0.0, 500.0};
  Range leg_reach{0.15, 0.45};
  std::array<Range, 3> euler_limits{Range{-0.6, 0.6}, Range{-0.6, 0.6}, Range{-3.2, 3.2}};
  double gravity = kDefaultGravity;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

enum class TaskKind { Lift, DoorOpen };

struct DoorGeometry {
  double frame_x = 1.0;          // door plane (closed) is x = frame_x
  double hinge_y = -0.5;         // hinge line at (frame_x, hinge_y)
  double width = 0.9;
  double grip_distance = 0.6;    // handle distance from hinge along the leaf
  double grip_height = 0.55;
  double handle_length = 0.12;   // lever from handle pivot to grip
  double handle_release = 0.35;  // handle angle that unlatches the door [rad]
  double body_radius = 0.35;     // horizontal bounding circle of the trunk
  double clearance_margin = 0.05;
};

struct ObjectModel {
  TaskKind task_kind = TaskKind::Lift;
  /// Lift: object mass per state. DoorOpen: (handle lump, door lump).
  Eigen::VectorXd dynamics_diag = Eigen::VectorXd::Constant(1, 3.0);
  /// Lift: constant term (−m g on the vertical state). DoorOpen: (spring stiffness, hinge friction).
  Eigen::VectorXd external_force = Eigen::VectorXd::Constant(1, -3.0 * kDefaultGravity);
  int state_dim = 1;
  bool planar_states = false;  // Lift only: also carry x/y velocities
  Vec3 grip_offset = Vec3::Zero();
  DoorGeometry door;

  [[nodiscard]] double lift_mass() const;
  void validate() const;

  static ObjectModel lift(double mass, double gravity = kDefaultGravity, bool planar = false);
  static ObjectModel door_open(double handle_lump = 0.5, double door_lump = 20.0,
                               double handle_spring = 2.0, double hinge_friction = 5.0);
};

enum class GaitPattern { Stand, Trot };

struct GaitSchedule {
  GaitPattern pattern = GaitPattern::Stand;
  double period = 0.5;
  double duty = 0.5;
  std::array<double, kNumLegs> phase_offsets{0.0, 0.5, 0.5, 0.0};

  void validate() const;
  static GaitSchedule stand() { return {}; }
  static GaitSchedule trot(double period = 0.4) { return {GaitPattern::Trot, period, 0.5, {0.0, 0.5, 0.5, 0.0}}; }
};

enum class ControllerKind { Full, Baseline, FixedForce };

std::string to_string(TaskKind k);
std::string to_string(GaitPattern p);
std::string to_string(ControllerKind k);
TaskKind parse_task_kind(const std::string& s);
GaitPattern parse_gait_pattern(const std::string& s);
ControllerKind parse_controller_kind(const std::string& s);

}  // namespace locoman
