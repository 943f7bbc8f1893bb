#include "locoman/physics.hpp"

#include <cmath>
#include <sstream>

#include "locoman/kinematics.hpp"

namespace locoman {

namespace {

constexpr int kHandle = 0;
constexpr int kDoor = 1;

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

Vec3 gripper_offset(const SimWorld& w, const RobotModel& model) {
  return rot_zyx(w.robot.euler) * (model.arm_mount + arm_link(w.q_arm, model));
}

void sync_lift_state(SimWorld& w, const RobotModel& model) {
  w.object.grip = arm_fk(w.robot.pos, w.robot.euler, w.q_arm, model).position;
  w.object.grip_vel = end_effector_velocity(w, model);
  ObjectState& s = w.object.state;
  if (w.object.model.planar_states) {
    s.pos = w.object.grip;
    s.vel = w.object.grip_vel;
  } else {
    s.pos = Eigen::VectorXd::Constant(1, w.object.grip.z());
    s.vel = Eigen::VectorXd::Constant(1, w.object.grip_vel.z());
  }
}

void check_finite(const SimWorld& w) {
  bool ok = w.robot.finite() && std::isfinite(w.q_arm) && std::isfinite(w.dq_arm);
  if (w.object.present) ok = ok && w.object.state.pos.allFinite() && w.object.state.vel.allFinite();
  if (!ok) {
    std::ostringstream msg;
    msg << "simulation aborted at t=" << w.time << ": non-finite state (pos " << w.robot.pos.transpose()
        << ", euler " << w.robot.euler.transpose() << ", q_arm " << w.q_arm << ")";
    throw SimulationAbort(msg.str());
  }
}

// Door and handle under the gripper force, with a hard stop at closed and
// hinge stiction. The handle freezes once it has released the latch.
void step_door(SimWorld& w, const Vec3& force_on_door, double dt) {
  ObjectState& s = w.object.state;
  const ObjectModel& m = w.object.model;
  const DoorGeometry& door = m.door;
  const double spring = m.external_force(kHandle);
  const double friction = m.external_force(kDoor);

  if (!s.handle_released()) {
    const double torque = door.handle_length * force_on_door.dot(handle_tangent(s.pos(kHandle)));
    s.vel(kHandle) += dt * (torque - spring * s.pos(kHandle)) / m.dynamics_diag(kHandle);
    s.pos(kHandle) += dt * s.vel(kHandle);
    if (s.pos(kHandle) < 0.0) {
      s.pos(kHandle) = 0.0;
      s.vel(kHandle) = 0.0;
    }
    if (s.pos(kHandle) >= door.handle_release) s.release_time = s.elapsed + dt;
    return;
  }

  s.vel(kHandle) = 0.0;
  const double torque = door_push_distance(door) * force_on_door.dot(door_normal(s.pos(kDoor)));
  double v = s.vel(kDoor);
  if (v == 0.0 && std::abs(torque) <= friction) return;  // stuck
  const double dir = v != 0.0 ? (v > 0.0 ? 1.0 : -1.0) : (torque > 0.0 ? 1.0 : -1.0);
  const double v_new = v + dt * (torque - friction * dir) / m.dynamics_diag(kDoor);
  // Friction can stop the leaf but never reverse it within a step.
  v = (v_new * dir < 0.0) ? 0.0 : v_new;
  s.vel(kDoor) = v;
  s.pos(kDoor) += dt * v;
  if (s.pos(kDoor) < 0.0) {
    s.pos(kDoor) = 0.0;
    s.vel(kDoor) = 0.0;
  }
}

}  // namespace

Vec3 end_effector_velocity(const SimWorld& w, const RobotModel& model) {
  const Mat3 rot = rot_zyx(w.robot.euler);
  const Vec3 r = rot * (model.arm_mount + arm_link(w.q_arm, model));
  return w.robot.vel + w.robot.omega.cross(r) + rot * arm_link_dq(w.q_arm, model) * w.dq_arm;
}

void attach_lift_object(SimWorld& world, const ObjectModel& object, const RobotModel& model) {
  if (object.task_kind != TaskKind::Lift) throw std::invalid_argument("attach_lift_object: not a lift object");
  object.validate();
  world.object.present = true;
  world.object.model = object;
  sync_lift_state(world, model);
  world.object.state = ObjectState::at_rest(world.object.state.pos);
  sync_lift_state(world, model);
}

SimWorld step_physics(const SimWorld& world, const ControlInput& u, double dt, const RobotModel& model,
                      const std::optional<ArmCommand>& arm) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_physics: dt must be positive");
  if (!u.finite()) throw SimulationAbort("simulation aborted: non-finite control input at t=" + std::to_string(world.time));
  SimWorld w = world;
  const RobotState& x = world.robot;
  const double g = x.grav;
  const Mat3 inertia = world_inertia(model, x.euler);

  Vec3 force = Vec3(0.0, 0.0, -model.mass * g);
  Vec3 torque = -x.omega.cross(inertia * x.omega);
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    if (world.foot_mode[i] != FootMode::Stance) continue;
    force += u.foot_force[i];
    torque += (world.foot_pos[i] - x.pos).cross(u.foot_force[i]);
  }

  const double ddq = arm ? arm->kp * (arm->q_ref - world.q_arm) + arm->kd * (arm->dq_ref - world.dq_arm) : 0.0;
  const Vec3 r = gripper_offset(world, model);
  const bool held = world.object.present && world.object.model.task_kind == TaskKind::Lift;

  Vec3 acc;
  Vec3 alpha;
  if (held) {
    // Robot, rigid grasp and point-mass object solved together for (a, alpha, f).
    const double mo = world.object.model.lift_mass();
    const Mat3 rot = rot_zyx(x.euler);
    const Vec3 ldq = rot * arm_link_dq(world.q_arm, model);
    const Vec3 ld2q = -rot * arm_link(world.q_arm, model);
    const Vec3 bias = x.omega.cross(x.omega.cross(r)) + 2.0 * world.dq_arm * x.omega.cross(ldq) + ldq * ddq +
                      ld2q * world.dq_arm * world.dq_arm;
    Mat9 k = Mat9::Zero();
    Vec9 rhs;
    k.block<3, 3>(0, 0) = model.mass * Mat3::Identity();
    k.block<3, 3>(0, 6) = Mat3::Identity();
    k.block<3, 3>(3, 3) = inertia;
    k.block<3, 3>(3, 6) = skew(r);
    k.block<3, 3>(6, 0) = mo * Mat3::Identity();
    k.block<3, 3>(6, 3) = -mo * skew(r);
    k.block<3, 3>(6, 6) = -Mat3::Identity();
    rhs.segment<3>(0) = force;
    rhs.segment<3>(3) = torque;
    rhs.segment<3>(6) = Vec3(0.0, 0.0, -mo * g) - mo * bias;
    const Vec9 sol = k.partialPivLu().solve(rhs);
    acc = sol.segment<3>(0);
    alpha = sol.segment<3>(3);
    w.object_force = sol.segment<3>(6);
    w.manip_reaction = -w.object_force;
  } else {
    w.manip_reaction = u.manip_force;
    w.object_force = -u.manip_force;
    acc = (force + u.manip_force) / model.mass;
    alpha = inertia.ldlt().solve(torque + r.cross(u.manip_force));
  }

  // Velocities first; positions with the average velocity, which is exact
  // under constant acceleration. Angles follow the exact Euler-rate map.
  w.robot.vel = x.vel + dt * acc;
  w.robot.pos = x.pos + 0.5 * dt * (x.vel + w.robot.vel);
  w.robot.omega = x.omega + dt * alpha;
  w.robot.euler = x.euler + dt * omega_to_euler_rate(x.euler) * w.robot.omega;
  w.dq_arm = world.dq_arm + dt * ddq;
  w.q_arm = world.q_arm + dt * w.dq_arm;
  w.time = world.time + dt;

  if (world.object.present) {
    if (held) sync_lift_state(w, model);
    else step_door(w, w.object_force, dt);
    w.object.state.elapsed += dt;
  }
  check_finite(w);
  return w;
}

double mechanical_energy(const SimWorld& w, const RobotModel& model) {
  const RobotState& x = w.robot;
  double e = 0.5 * model.mass * x.vel.squaredNorm() +
             0.5 * x.omega.dot(world_inertia(model, x.euler) * x.omega) + model.mass * x.grav * x.pos.z();
  if (!w.object.present) return e;
  const ObjectModel& m = w.object.model;
  if (m.task_kind == TaskKind::Lift) {
    const double mo = m.lift_mass();
    e += 0.5 * mo * w.object.grip_vel.squaredNorm() + mo * x.grav * w.object.grip.z();
  } else {
    const ObjectState& s = w.object.state;
    e += 0.5 * m.dynamics_diag(kHandle) * s.vel(kHandle) * s.vel(kHandle) +
         0.5 * m.dynamics_diag(kDoor) * s.vel(kDoor) * s.vel(kDoor) +
         0.5 * m.external_force(kHandle) * s.pos(kHandle) * s.pos(kHandle);
  }
  return e;
}

Vec3 linear_momentum(const SimWorld& w, const RobotModel& model) {
  Vec3 p = model.mass * w.robot.vel;
  if (w.object.present && w.object.model.task_kind == TaskKind::Lift)
    p += w.object.model.lift_mass() * w.object.grip_vel;
  return p;
}

}  // namespace locoman
