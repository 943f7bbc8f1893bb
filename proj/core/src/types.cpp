#include "locoman/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace locoman {

StateVector RobotState::to_vector() const {
  StateVector x;
  x << euler, pos, omega, vel, grav;
  return x;
}

RobotState RobotState::from_vector(const StateVector& x) {
  RobotState s;
  s.euler = x.segment<3>(0);
  s.pos = x.segment<3>(3);
  s.omega = x.segment<3>(6);
  s.vel = x.segment<3>(9);
  s.grav = x(12);
  return s;
}

bool RobotState::finite() const { return to_vector().allFinite(); }

InputVector ControlInput::to_vector() const {
  InputVector u;
  for (int i = 0; i < kNumLegs; ++i) u.segment<3>(3 * i) = foot_force[static_cast<std::size_t>(i)];
  u.segment<3>(12) = manip_force;
  return u;
}

ControlInput ControlInput::from_vector(const InputVector& u) {
  ControlInput c;
  for (int i = 0; i < kNumLegs; ++i) c.foot_force[static_cast<std::size_t>(i)] = u.segment<3>(3 * i);
  c.manip_force = u.segment<3>(12);
  return c;
}

bool ControlInput::finite() const { return to_vector().allFinite(); }

void RobotModel::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("RobotModel: mass must be positive");
  if ((inertia_body - inertia_body.transpose()).norm() > 1e-10)
    throw std::invalid_argument("RobotModel: inertia_body must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia_body);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("RobotModel: inertia_body must be positive definite");
  if (!(mu > 0.0)) throw std::invalid_argument("RobotModel: mu must be positive");
  if (!(leg_reach.min < leg_reach.max)) throw std::invalid_argument("RobotModel: leg_reach min >= max");
  if (!(arm_limits.min < arm_limits.max)) throw std::invalid_argument("RobotModel: arm_limits min >= max");
  if (!(fz_bounds.min <= fz_bounds.max)) throw std::invalid_argument("RobotModel: fz_bounds min > max");
  if (!(arm_length > 0.0)) throw std::invalid_argument("RobotModel: arm_length must be positive");
  for (const auto& r : euler_limits)
    if (!(r.min < r.max)) throw std::invalid_argument("RobotModel: euler_limits min >= max");
}

double ObjectModel::lift_mass() const {
  if (task_kind != TaskKind::Lift) throw std::logic_error("lift_mass on a non-lift object");
  return dynamics_diag(0);
}

void ObjectModel::validate() const {
  const int expected = task_kind == TaskKind::Lift ? (planar_states ? 3 : 1) : 2;
  if (state_dim != expected || dynamics_diag.size() != expected || external_force.size() != expected)
    throw std::invalid_argument("ObjectModel: state layout does not match task kind " + to_string(task_kind));
  if ((dynamics_diag.array() <= 0.0).any())
    throw std::invalid_argument("ObjectModel: dynamics_diag entries must be positive");
  if (!dynamics_diag.allFinite() || !external_force.allFinite())
    throw std::invalid_argument("ObjectModel: non-finite parameters");
}

ObjectModel ObjectModel::lift(double mass, double gravity, bool planar) {
  ObjectModel m;
  m.task_kind = TaskKind::Lift;
  m.planar_states = planar;
  m.state_dim = planar ? 3 : 1;
  m.dynamics_diag = Eigen::VectorXd::Constant(m.state_dim, mass);
  m.external_force = Eigen::VectorXd::Zero(m.state_dim);
  m.external_force(m.state_dim - 1) = -mass * gravity;
  return m;
}

ObjectModel ObjectModel::door_open(double handle_lump, double door_lump, double handle_spring,
                                   double hinge_friction) {
  ObjectModel m;
  m.task_kind = TaskKind::DoorOpen;
  m.state_dim = 2;
  m.dynamics_diag = Eigen::Vector2d(handle_lump, door_lump);
  m.external_force = Eigen::Vector2d(handle_spring, hinge_friction);
  return m;
}

void GaitSchedule::validate() const {
  if (!(duty > 0.0 && duty <= 1.0)) throw std::invalid_argument("GaitSchedule: duty must be in (0,1]");
  if (!(period > 0.0)) throw std::invalid_argument("GaitSchedule: period must be positive");
  for (double o : phase_offsets)
    if (!(o >= 0.0 && o < 1.0)) throw std::invalid_argument("GaitSchedule: phase offsets must be in [0,1)");
}

std::string to_string(TaskKind k) { return k == TaskKind::Lift ? "Lift" : "DoorOpen"; }
std::string to_string(GaitPattern p) { return p == GaitPattern::Stand ? "Stand" : "Trot"; }
std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Full: return "Full";
    case ControllerKind::Baseline: return "Baseline";
    case ControllerKind::FixedForce: return "FixedForce";
  }
  return "?";
}

TaskKind parse_task_kind(const std::string& s) {
  if (s == "Lift") return TaskKind::Lift;
  if (s == "DoorOpen") return TaskKind::DoorOpen;
  throw std::invalid_argument("unknown task kind '" + s + "'");
}

GaitPattern parse_gait_pattern(const std::string& s) {
  if (s == "Stand") return GaitPattern::Stand;
  if (s == "Trot") return GaitPattern::Trot;
  throw std::invalid_argument("unknown gait pattern '" + s + "'");
}

ControllerKind parse_controller_kind(const std::string& s) {
  if (s == "Full") return ControllerKind::Full;
  if (s == "Baseline") return ControllerKind::Baseline;
  if (s == "FixedForce") return ControllerKind::FixedForce;
  throw std::invalid_argument("unknown controller kind '" + s + "'");
}

}  // namespace locoman
