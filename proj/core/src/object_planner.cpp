#include "locoman/object_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace locoman {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kHandle = 0;
constexpr int kDoor = 1;
constexpr double kHandleOvershoot = 1.1;  // aim past the release angle so it is actually crossed

double sign_or(double v, double fallback) {
  if (v > 1e-9) return 1.0;
  if (v < -1e-9) return -1.0;
  return fallback;
}

ManipulationPhase phase_of(const TaskCommand& cmd, const ObjectState& s) {
  if (cmd.kind == TaskKind::Lift) return ManipulationPhase::Lift;
  return s.handle_released() ? ManipulationPhase::DoorPush : ManipulationPhase::HandleTurn;
}

// Gain from the planner's decision variable to the generalized force in A X' = f_mu + b f.
VectorXd input_gain(const ObjectModel& model, ManipulationPhase phase) {
  if (model.task_kind == TaskKind::Lift) return VectorXd::Ones(model.state_dim);
  VectorXd b = VectorXd::Zero(2);
  if (phase == ManipulationPhase::HandleTurn) b(kHandle) = 1.0;
  else b(kDoor) = door_push_distance(model.door);
  return b;
}

}  // namespace

void TaskCommand::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("TaskCommand: duration must be positive");
  if (!std::isfinite(target)) throw std::invalid_argument("TaskCommand: target must be finite");
  if (kind == TaskKind::DoorOpen && !(handle_duration > 0.0))
    throw std::invalid_argument("TaskCommand: handle_duration must be positive");
}

ObjectState ObjectState::at_rest(const VectorXd& pos) {
  ObjectState s;
  s.pos = pos;
  s.vel = VectorXd::Zero(pos.size());
  s.origin = pos;
  return s;
}

std::string to_string(ManipulationPhase p) {
  switch (p) {
    case ManipulationPhase::Lift: return "Lift";
    case ManipulationPhase::HandleTurn: return "HandleTurn";
    case ManipulationPhase::DoorPush: return "DoorPush";
  }
  return "?";
}

ObjectDynamics object_dynamics(const ObjectModel& model, const ObjectState& state, const TaskCommand& cmd) {
  model.validate();
  ObjectDynamics d;
  d.inertia = model.dynamics_diag;
  if (model.task_kind == TaskKind::Lift) {
    d.external = model.external_force;
    return d;
  }
  const double spring = model.external_force(kHandle);
  const double friction = model.external_force(kDoor);
  d.external = VectorXd::Zero(2);
  d.external(kHandle) = -spring * state.pos(kHandle);
  const double door_vel = state.vel.size() > kDoor ? state.vel(kDoor) : 0.0;
  d.external(kDoor) = -friction * sign_or(door_vel, cmd.target >= 0.0 ? 1.0 : -1.0);
  return d;
}

TrapezoidSample trapezoid(double distance, double duration, double t) {
  if (t <= 0.0) return {0.0, 0.0};
  if (t >= duration) return {distance, 0.0};
  const double ta = 0.25 * duration;
  const double v_peak = distance / (duration - ta);
  const double accel = v_peak / ta;
  if (t < ta) return {0.5 * accel * t * t, accel * t};
  if (t <= duration - ta) return {0.5 * accel * ta * ta + v_peak * (t - ta), v_peak};
  const double tr = duration - t;
  return {distance - 0.5 * accel * tr * tr, accel * tr};
}

Vec3 door_normal(double door_angle) { return {std::cos(door_angle), -std::sin(door_angle), 0.0}; }
Vec3 door_tangent(double door_angle) { return {std::sin(door_angle), std::cos(door_angle), 0.0}; }
Vec3 handle_tangent(double handle_angle) { return {0.0, std::sin(handle_angle), -std::cos(handle_angle)}; }

double door_push_distance(const DoorGeometry& door) {
  return door.grip_distance - door.handle_length * std::cos(door.handle_release);
}
double door_push_height(const DoorGeometry& door) {
  return door.grip_height - door.handle_length * std::sin(door.handle_release);
}

Vec3 door_grip_point(const DoorGeometry& door, double handle_angle, double door_angle, bool released) {
  if (!released) {
    const Vec3 pivot(door.frame_x, door.hinge_y + door.grip_distance, door.grip_height);
    return pivot + door.handle_length * Vec3(0.0, -std::cos(handle_angle), -std::sin(handle_angle));
  }
  const double s = door_push_distance(door);
  return Vec3(door.frame_x, door.hinge_y, door_push_height(door)) + s * door_tangent(door_angle);
}

ObjectReference make_reference(const TaskCommand& cmd, const ObjectModel& model, const ObjectState& current,
                               double dt, int horizon) {
  cmd.validate();
  const int d = model.state_dim;
  ObjectReference ref;
  ref.pos.assign(static_cast<std::size_t>(horizon + 1), VectorXd::Zero(d));
  ref.vel.assign(static_cast<std::size_t>(horizon + 1), VectorXd::Zero(d));
  for (int k = 0; k <= horizon; ++k) {
    const double t = current.elapsed + k * dt;
    VectorXd& p = ref.pos[static_cast<std::size_t>(k)];
    VectorXd& v = ref.vel[static_cast<std::size_t>(k)];
    p = current.origin;
    if (cmd.kind == TaskKind::Lift) {
      if (!cmd.hold && t >= cmd.duration) {
        p = current.pos;
        continue;
      }
      const TrapezoidSample s = trapezoid(cmd.target, cmd.duration, t);
      p(d - 1) += s.pos;
      v(d - 1) = s.vel;
    } else if (!current.handle_released()) {
      const TrapezoidSample s =
          trapezoid(kHandleOvershoot * model.door.handle_release, cmd.handle_duration, t);
      p(kHandle) += s.pos;
      v(kHandle) = s.vel;
    } else {
      p(kHandle) = current.pos(kHandle);
      const TrapezoidSample s = trapezoid(cmd.target, cmd.duration, t - current.release_time);
      p(kDoor) += s.pos;
      v(kDoor) = s.vel;
    }
  }
  return ref;
}

ObjectPlanner::ObjectPlanner(PlannerSettings settings)
    : settings_(settings), qp_(QpSettings{1e-9, 4000}) {}

ManipulationPlan ObjectPlanner::plan(const TaskCommand& cmd, const ObjectModel& model, const ObjectState& current,
                                     double dt, int horizon, const Vec3& current_grip) {
  if (horizon < 1 || !(dt > 0.0)) throw std::invalid_argument("ObjectPlanner: need horizon >= 1 and dt > 0");
  model.validate();
  const int d = model.state_dim;
  if (current.pos.size() != d || current.vel.size() != d || current.origin.size() != d)
    throw std::invalid_argument("ObjectPlanner: object state does not match the model layout");

  const ManipulationPhase phase = phase_of(cmd, current);
  ObjectDynamics dyn = object_dynamics(model, current, cmd);
  const VectorXd gain = input_gain(model, phase);
  // Axes not driven in this phase are held still.
  for (int a = 0; a < d; ++a)
    if (gain(a) == 0.0) dyn.external(a) = 0.0;

  ObjectReference ref = make_reference(cmd, model, current, dt, horizon);
  // Fold the present position error into the velocity reference.
  const VectorXd pos_err = ref.pos.front() - current.pos;
  bool backward_only = true;
  for (int k = 1; k <= horizon; ++k) {
    for (int a = 0; a < d; ++a)
      if (gain(a) != 0.0) ref.vel[static_cast<std::size_t>(k)](a) += settings_.position_gain * pos_err(a);
    if (phase == ManipulationPhase::DoorPush && ref.vel[static_cast<std::size_t>(k)](kDoor) >= 0.0)
      backward_only = false;
  }
  // A push cannot close the door; a leaf at rest that should only go back stays stuck.
  if (phase == ManipulationPhase::DoorPush && backward_only && current.vel(kDoor) == 0.0) dyn.external(kDoor) = 0.0;

  // Decision vector: f[k*d + a]. Velocities are X_k = X_0 + (dt/A) sum_{j<k} (f_mu + b f_j).
  const int n = horizon * d;
  MatrixXd hess = MatrixXd::Zero(n, n);
  VectorXd lin = VectorXd::Zero(n);
  const double wt = settings_.tracking_weight;
  const double wf = settings_.force_weight;
  for (int a = 0; a < d; ++a) {
    if (gain(a) == 0.0) continue;
    const double s = dt * gain(a) / dyn.inertia(a);
    for (int k = 1; k <= horizon; ++k) {
      // residual_k = c_k + s * sum_{j<k} f_j
      const double c = current.vel(a) + k * dt * dyn.external(a) / dyn.inertia(a) -
                       ref.vel[static_cast<std::size_t>(k)](a);
      for (int i = 0; i < k; ++i) {
        lin(i * d + a) += 2.0 * wt * s * c;
        for (int j = 0; j < k; ++j) hess(i * d + a, j * d + a) += 2.0 * wt * s * s;
      }
    }
    // Regularize toward the inverse-dynamics force of the reference.
    double prev = current.vel(a);
    for (int k = 0; k < horizon; ++k) {
      const double next = ref.vel[static_cast<std::size_t>(k + 1)](a);
      const double ff = (dyn.inertia(a) * (next - prev) / dt - dyn.external(a)) / gain(a);
      hess(k * d + a, k * d + a) += 2.0 * wf;
      lin(k * d + a) -= 2.0 * wf * ff;
      prev = next;
    }
  }

  QpProblem qp = QpProblem::unconstrained(hess, lin);
  qp.ineq_matrix = MatrixXd::Identity(n, n);
  qp.ineq_lower.resize(n);
  qp.ineq_upper.resize(n);
  std::string family;
  for (int k = 0; k < horizon; ++k) {
    for (int a = 0; a < d; ++a) {
      double lo = 0.0, hi = 0.0;
      if (gain(a) != 0.0) {
        switch (phase) {
          case ManipulationPhase::Lift: lo = -settings_.lift_force_max; hi = settings_.lift_force_max; break;
          case ManipulationPhase::HandleTurn: lo = -settings_.handle_torque_max; hi = settings_.handle_torque_max; break;
          case ManipulationPhase::DoorPush: lo = 0.0; hi = settings_.push_force_max; break;
        }
      }
      qp.ineq_lower(k * d + a) = lo;
      qp.ineq_upper(k * d + a) = hi;
    }
  }
  // Unused axes have zero rows in the Hessian; the [0,0] bound pins them.
  for (int i = 0; i < n; ++i)
    if (hess(i, i) == 0.0) hess(i, i) = 1.0;
  qp.hessian = hess;

  const SolveReport sol = qp_.solve(qp, warm_);
  if (sol.status == SolveStatus::Infeasible) {
    warm_.reset();
    throw PlannerInfeasible("force bounds", "object planner QP infeasible: force bounds cannot be met");
  }
  if (sol.status != SolveStatus::Optimal) {
    warm_.reset();
    throw PlannerInfeasible("dynamics", "object planner QP did not converge (" + to_string(sol.status) + ")");
  }
  warm_ = QpWarmStart{sol.solution, sol.eq_multipliers, sol.ineq_multipliers};

  ManipulationPlan out;
  out.phase = phase;
  out.horizon_dt = dt;
  out.reference = ref;
  out.states.reserve(static_cast<std::size_t>(horizon + 1));
  out.positions.reserve(static_cast<std::size_t>(horizon + 1));
  out.states.push_back(current.vel);
  out.positions.push_back(current.pos);
  for (int k = 0; k < horizon; ++k) {
    VectorXd f = sol.solution.segment(k * d, d);
    for (int a = 0; a < d; ++a)
      if (gain(a) == 0.0) f(a) = 0.0;
    out.task_force.push_back(f);
    const VectorXd& x = out.states.back();
    const VectorXd accel = (dyn.external + gain.cwiseProduct(f)).cwiseQuotient(dyn.inertia);
    const VectorXd x_next = x + dt * accel;
    // Positions integrate the planned velocity with the trapezoid rule.
    out.positions.push_back(out.positions.back() + 0.5 * dt * (x + x_next));
    out.states.push_back(x_next);
  }

  for (int k = 0; k <= horizon; ++k) {
    const VectorXd& p = out.positions[static_cast<std::size_t>(k)];
    if (model.task_kind == TaskKind::Lift) {
      Vec3 disp = Vec3::Zero();
      const VectorXd delta = p - current.pos;
      if (d == 3) disp = Vec3(delta(0), delta(1), delta(2));
      else disp.z() = delta(0);
      out.grip_point.push_back(current_grip + disp);
    } else {
      out.grip_point.push_back(door_grip_point(model.door, p(kHandle), p(kDoor), current.handle_released()));
      out.handle_angle.push_back(p(kHandle));
    }
  }
  for (int k = 0; k < horizon; ++k) {
    const VectorXd& f = out.task_force[static_cast<std::size_t>(k)];
    const VectorXd& p = out.positions[static_cast<std::size_t>(k)];
    Vec3 fc = Vec3::Zero();
    switch (phase) {
      case ManipulationPhase::Lift:
        if (d == 3) fc = Vec3(f(0), f(1), f(2));
        else fc.z() = f(0);
        break;
      case ManipulationPhase::HandleTurn:
        fc = f(kHandle) / model.door.handle_length * handle_tangent(p(kHandle));
        break;
      case ManipulationPhase::DoorPush:
        fc = f(kDoor) * door_normal(p(kDoor));
        break;
    }
    out.force.push_back(fc);
  }
  return out;
}

}  // namespace locoman
