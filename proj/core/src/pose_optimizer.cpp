#include "locoman/pose_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "locoman/kinematics.hpp"

namespace locoman {

namespace {

using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Eigen::Matrix<double, PoseDecision::kSize, 1> PoseDecision::to_vector() const {
  Eigen::Matrix<double, kSize, 1> x;
  x << pos, euler, q_arm, manip_force;
  return x;
}

PoseDecision PoseDecision::from_vector(const VectorXd& x) {
  if (x.size() != kSize) throw std::invalid_argument("PoseDecision: expected 10 entries");
  PoseDecision p;
  p.pos = x.segment<3>(0);
  p.euler = x.segment<3>(3);
  p.q_arm = x(6);
  p.manip_force = x.segment<3>(7);
  return p;
}

void PoseWeights::validate() const {
  const double all[] = {w_height, w_euler.x(), w_euler.y(), w_euler.z(), w_torque, w_reg_xy};
  bool any = false;
  for (double w : all) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("PoseWeights: weights must be finite and >= 0");
    any = any || w > 0.0;
  }
  if (!any) throw std::invalid_argument("PoseWeights: at least one weight must be positive");
}

PoseWeights PoseWeights::scaled(double c) const {
  return {c * w_height, c * w_euler, c * w_torque, c * w_reg_xy};
}

double door_clearance_constraint(const PoseDecision& pose, const DoorGeometry& door) {
  return (door.frame_x - pose.pos.x()) - door.body_radius;
}

double arm_torque(const PoseDecision& pose, const RobotModel& model) {
  return arm_jacobian(pose.euler, pose.q_arm, model).dot(pose.manip_force);
}

double pose_cost(const PoseDecision& pose, const PoseTarget& target, const PoseWeights& w, const RobotModel& model) {
  const double dz = pose.pos.z() - target.ref_height;
  const double dyaw = pose.euler.z() - target.ref_yaw;
  const double tau = arm_torque(pose, model);
  const Eigen::Vector2d dxy = pose.pos.head<2>() - target.anchor_xy;
  return w.w_height * dz * dz + w.w_euler.x() * pose.euler.x() * pose.euler.x() +
         w.w_euler.y() * pose.euler.y() * pose.euler.y() + w.w_euler.z() * dyaw * dyaw + w.w_torque * tau * tau +
         w.w_reg_xy * dxy.squaredNorm();
}

std::vector<PoseViolation> pose_violations(const PoseDecision& pose, const PoseTarget& target,
                                           const RobotModel& model) {
  auto outside = [](const Range& r, double v) { return std::max({0.0, r.min - v, v - r.max}); };
  std::vector<PoseViolation> out;
  double reach = 0.0;
  for (int i = 0; i < kNumLegs; ++i) reach = std::max(reach, outside(model.leg_reach, hip_height(pose.pos, pose.euler, i, model)));
  out.push_back({"leg reach", reach});
  double orient = 0.0;
  for (int i = 0; i < 3; ++i) orient = std::max(orient, outside(model.euler_limits[static_cast<std::size_t>(i)], pose.euler(i)));
  out.push_back({"orientation limits", orient});
  out.push_back({"arm limits", outside(model.arm_limits, pose.q_arm)});
  const Vec3 ee = arm_fk(pose.pos, pose.euler, pose.q_arm, model).position;
  out.push_back({"end-effector target", (ee - target.grip).lpNorm<Eigen::Infinity>()});
  out.push_back({"manipulation force", (pose.manip_force - target.force).lpNorm<Eigen::Infinity>()});
  if (target.roll) out.push_back({"handle orientation", std::abs(pose.euler.x() - *target.roll)});
  if (target.door) {
    const double c = door_clearance_constraint(pose, *target.door);
    out.push_back({"door clearance", std::max(0.0, target.door->clearance_margin - c)});
  }
  return out;
}

PoseResult solve_pose(const PoseTarget& target, const PoseWeights& weights, const RobotModel& model,
                      const PoseDecision& x0, const NlpOptions& options) {
  weights.validate();
  model.validate();

  NlpProblem p;
  p.num_vars = PoseDecision::kSize;
  p.cost = [&](const VectorXd& x) { return pose_cost(PoseDecision::from_vector(x), target, weights, model); };
  p.eq_constraints = [&](const VectorXd& x) {
    const PoseDecision d = PoseDecision::from_vector(x);
    VectorXd c(target.roll ? 7 : 6);
    c.head<3>() = arm_fk(d.pos, d.euler, d.q_arm, model).position - target.grip;
    c.segment<3>(3) = d.manip_force - target.force;
    if (target.roll) c(6) = d.euler.x() - *target.roll;
    return c;
  };
  const int n_ineq = kNumLegs + (target.door ? 1 : 0);
  p.ineq_constraints = [&, n_ineq](const VectorXd& x) {
    const PoseDecision d = PoseDecision::from_vector(x);
    VectorXd h(n_ineq);
    for (int i = 0; i < kNumLegs; ++i) h(i) = hip_height(d.pos, d.euler, i, model);
    if (target.door) h(kNumLegs) = door_clearance_constraint(d, *target.door);
    return h;
  };
  p.ineq_lower.resize(n_ineq);
  p.ineq_upper.resize(n_ineq);
  p.ineq_lower.head(kNumLegs).setConstant(model.leg_reach.min);
  p.ineq_upper.head(kNumLegs).setConstant(model.leg_reach.max);
  if (target.door) {
    p.ineq_lower(kNumLegs) = target.door->clearance_margin;
    p.ineq_upper(kNumLegs) = kInf;
  }
  p.lower_bounds = VectorXd::Constant(PoseDecision::kSize, -kInf);
  p.upper_bounds = VectorXd::Constant(PoseDecision::kSize, kInf);
  for (int i = 0; i < 3; ++i) {
    p.lower_bounds(3 + i) = model.euler_limits[static_cast<std::size_t>(i)].min;
    p.upper_bounds(3 + i) = model.euler_limits[static_cast<std::size_t>(i)].max;
  }
  p.lower_bounds(6) = model.arm_limits.min;
  p.upper_bounds(6) = model.arm_limits.max;

  // Start from the warm start with the force already pinned; it is exact.
  PoseDecision start = x0;
  start.manip_force = target.force;
  const SolveReport r = SqpSolver(options).solve(p, start.to_vector());

  PoseResult out;
  out.pose = PoseDecision::from_vector(r.solution);
  out.status = r.status;
  out.iterations = r.iterations;
  out.cost = pose_cost(out.pose, target, weights, model);
  const auto viol = pose_violations(out.pose, target, model);
  const auto worst = std::max_element(viol.begin(), viol.end(),
                                      [](const PoseViolation& a, const PoseViolation& b) { return a.amount < b.amount; });
  out.max_violation = worst->amount;
  if (r.status == SolveStatus::Optimal && out.max_violation <= kPoseFeasTol) return out;
  if (r.status == SolveStatus::MaxIter && out.max_violation <= kPoseFeasTol) {
    out.degraded = true;
    return out;
  }
  throw PoseInfeasible(worst->family, -1, "pose optimization infeasible: " + worst->family + " cannot be met");
}

PoseTrajectory build_reference_trajectory(const ManipulationPlan& plan, const RobotState& current, double q_arm,
                                          const PoseWeights& weights, const RobotModel& model,
                                          const PoseContext& context, const NlpOptions& options) {
  const int n = plan.horizon();
  if (n < 1 || static_cast<int>(plan.grip_point.size()) != n + 1)
    throw std::invalid_argument("build_reference_trajectory: plan needs N forces and N+1 grip points");
  const bool handle = plan.phase == ManipulationPhase::HandleTurn;
  if (handle && static_cast<int>(plan.handle_angle.size()) != n + 1)
    throw std::invalid_argument("build_reference_trajectory: handle turn plan needs N+1 handle angles");

  PoseTarget target;
  target.ref_height = context.ref_height;
  target.ref_yaw = current.euler.z();
  target.anchor_xy = current.pos.head<2>();
  target.door = context.door;

  PoseTrajectory out;
  PoseDecision warm;
  warm.pos = current.pos;
  warm.euler = current.euler;
  warm.q_arm = q_arm;
  for (int k = 0; k <= n; ++k) {
    target.grip = plan.grip_point[static_cast<std::size_t>(k)];
    target.force = plan.force[static_cast<std::size_t>(std::min(k, n - 1))];
    if (handle) target.roll = plan.handle_angle[static_cast<std::size_t>(k)];
    try {
      const PoseResult r = solve_pose(target, weights, model, warm, options);
      out.degraded = out.degraded || r.degraded;
      warm = r.pose;
    } catch (const PoseInfeasible& e) {
      throw PoseInfeasible(e.family(), k, std::string(e.what()) + " at horizon step " + std::to_string(k));
    }
    out.poses.push_back(warm);
  }

  const double dt = plan.horizon_dt;
  out.reference.resize(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    const PoseDecision& p = out.poses[static_cast<std::size_t>(k)];
    RobotState& s = out.reference[static_cast<std::size_t>(k)];
    s.pos = p.pos;
    s.euler = p.euler;
    s.grav = model.gravity;
    if (k < n) {
      const PoseDecision& next = out.poses[static_cast<std::size_t>(k + 1)];
      s.vel = (next.pos - p.pos) / dt;
      s.omega = euler_rate_to_omega(p.euler) * ((next.euler - p.euler) / dt);
    } else if (n > 0) {
      s.vel = out.reference[static_cast<std::size_t>(n - 1)].vel;
      s.omega = out.reference[static_cast<std::size_t>(n - 1)].omega;
    }
  }
  return out;
}

}  // namespace locoman
