#include "locoman/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "locoman/kinematics.hpp"
#include "locoman/physics.hpp"

namespace locoman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ControllerOutput {
  ControlInput u;
  ArmCommand arm;                     // joint hold when there is no task
  std::optional<double> grip_height;  // otherwise: planned grip height and its rate
  double grip_rate = 0.0;
  RobotState reference;
  StanceFlags stance{true, true, true, true};
  bool planner_degraded = false;
  bool pose_degraded = false;
  bool mpc_degraded = false;
};

MpcConfig mpc_config(const ScenarioConfig& cfg) {
  MpcConfig c = cfg.mpc;
  c.kind = cfg.controller_kind;
  return c;
}

class ScenarioRunner {
 public:
  explicit ScenarioRunner(const ScenarioConfig& cfg)
      : cfg_(cfg), model_(cfg.robot), planner_(cfg.planner), mpc_(mpc_config(cfg)) {}

  RunMetrics run();

 private:
  void init_world();
  ControllerOutput control(const ControllerOutput& previous);
  void update_feet(double t);
  std::array<Vec3, kNumLegs> predicted_feet() const;
  double task_progress() const;

  const ScenarioConfig& cfg_;
  RobotModel model_;
  ObjectPlanner planner_;
  LocoMpc mpc_;
  SimWorld world_;
  std::array<SwingTrajectory, kNumLegs> swing_{};
  RobotState nominal_;
  Vec3 pickup_ = Vec3::Zero();  // where the lift object was grasped
  RunMetrics metrics_;
};

void ScenarioRunner::init_world() {
  std::mt19937_64 rng(cfg_.seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  const double a = cfg_.initial_noise;

  nominal_.pos = Vec3(cfg_.start_xy.x(), cfg_.start_xy.y(), cfg_.stand_height);
  nominal_.euler = Vec3(0.0, 0.0, cfg_.start_yaw);
  nominal_.grav = model_.gravity;

  world_.robot = nominal_;
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    Vec3 offset = model_.hip_offset[i];
    offset.x() += i < 2 ? cfg_.front_foot_shift : cfg_.rear_foot_shift;
    world_.foot_pos[i] = nominal_.pos + rot_z(cfg_.start_yaw) * offset;
    world_.foot_pos[i].z() = 0.0;
  }
  // Noise is drawn even at zero amplitude so the stream is the same either way.
  Vec3 dp;
  Vec3 de;
  for (int i = 0; i < 3; ++i) dp(i) = a * noise(rng);
  for (int i = 0; i < 3; ++i) de(i) = a * noise(rng);
  world_.robot.pos += dp;
  world_.robot.euler += de;
  world_.q_arm = cfg_.q_arm0;

  if (!cfg_.task) return;
  if (cfg_.task->kind == TaskKind::Lift) {
    attach_lift_object(world_, cfg_.object, model_);
    pickup_ = world_.object.grip;
  } else {
    world_.object.present = true;
    world_.object.model = cfg_.object;
    world_.object.state = ObjectState::at_rest(Eigen::VectorXd::Zero(cfg_.object.state_dim));
  }
}

std::array<Vec3, kNumLegs> ScenarioRunner::predicted_feet() const {
  std::array<Vec3, kNumLegs> feet = world_.foot_pos;
  for (std::size_t i = 0; i < kNumLegs; ++i)
    if (world_.foot_mode[i] == FootMode::Swing) feet[i] = swing_[i].end;
  return feet;
}

void ScenarioRunner::update_feet(double t) {
  const GaitPhase phase = gait_tick(cfg_.gait, t);
  const double t_stance = stance_duration(cfg_.gait);
  const double t_swing = swing_duration(cfg_.gait);
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const bool stance = phase.stance[i];
    if (stance && world_.foot_mode[i] == FootMode::Swing) {
      world_.foot_pos[i] = swing_[i].end;
      world_.foot_mode[i] = FootMode::Stance;
    } else if (!stance && world_.foot_mode[i] == FootMode::Stance) {
      // Aim for where the hip will be at touchdown.
      const Vec3 hip = hip_position(world_.robot.pos, world_.robot.euler, static_cast<int>(i), model_) +
                       t_swing * world_.robot.vel;
      swing_[i] = SwingTrajectory{world_.foot_pos[i],
                                  swing_target(hip, world_.robot.vel, cfg_.vel_cmd, t_stance, cfg_.raibert_gain),
                                  cfg_.swing_height};
      world_.foot_mode[i] = FootMode::Swing;
    }
    if (world_.foot_mode[i] == FootMode::Swing) world_.foot_pos[i] = swing_[i].position(phase.progress[i]);
  }
}

double ScenarioRunner::task_progress() const {
  if (!cfg_.task) return 0.0;
  const ObjectState& s = world_.object.state;
  if (cfg_.task->kind == TaskKind::Lift) return s.pos(s.pos.size() - 1) - s.origin(s.origin.size() - 1);
  return s.pos(1);
}

ControllerOutput ScenarioRunner::control(const ControllerOutput& previous) {
  const int n = cfg_.mpc.horizon_N;
  const double dt = cfg_.mpc.dt();
  const double t = world_.time;
  ControllerOutput out = previous;
  out.planner_degraded = out.pose_degraded = out.mpc_degraded = false;

  // Reference poses and the gripper force schedule.
  std::vector<PoseDecision> poses;
  std::vector<RobotState> reference;
  std::vector<Vec3> object_force(static_cast<std::size_t>(n), Vec3::Zero());
  std::vector<Vec3> grip_plan;
  if (!cfg_.task) {
    for (int k = 0; k <= n; ++k) {
      RobotState r = nominal_;
      r.pos += (t + k * dt) * Vec3(cfg_.vel_cmd.x(), cfg_.vel_cmd.y(), 0.0);
      r.vel = Vec3(cfg_.vel_cmd.x(), cfg_.vel_cmd.y(), 0.0);
      reference.push_back(r);
      PoseDecision p;
      p.pos = r.pos;
      p.euler = r.euler;
      p.q_arm = cfg_.q_arm0;
      poses.push_back(p);
    }
  } else {
    // A vertical lift keeps the object over the pickup point; only its height is measured.
    Vec3 grip = world_.object.grip;
    if (cfg_.task->kind == TaskKind::Lift && !cfg_.object.planar_states) grip.head<2>() = pickup_.head<2>();
    std::optional<ManipulationPlan> plan;
    try {
      plan = planner_.plan(*cfg_.task, cfg_.object, world_.object.state, dt, n, grip);
    } catch (const PlannerInfeasible&) {
      ++metrics_.planner_failures;
      out.planner_degraded = true;
      return out;
    }
    const bool door = cfg_.task->kind == TaskKind::DoorOpen;
    if (door && plan->phase == ManipulationPhase::DoorPush) {
      for (int k = 0; k < n; ++k) {
        const Vec3& f = plan->force[static_cast<std::size_t>(k)];
        const Vec3 normal = door_normal(plan->positions[static_cast<std::size_t>(k)](1));
        metrics_.max_push_tangential = std::max(metrics_.max_push_tangential, (f - f.dot(normal) * normal).norm());
      }
    }
    // What the controller believes the gripper force will be. Baseline keeps the
    // full pose reference; only its MPC is blind to the object.
    ManipulationPlan believed = *plan;
    if (cfg_.controller_kind == ControllerKind::FixedForce) {
      const Vec3 weight = door ? Vec3::Zero() : Vec3(0.0, 0.0, cfg_.object.lift_mass() * model_.gravity);
      std::fill(believed.force.begin(), believed.force.end(), weight);
      // No object planner: the lift grip follows the task profile open loop.
      if (!door) {
        const Eigen::Index z = plan->reference.pos.front().size() - 1;
        const double now = world_.object.state.pos(z);
        for (std::size_t k = 0; k < believed.grip_point.size(); ++k)
          believed.grip_point[k].z() = grip.z() + plan->reference.pos[k](z) - now;
      }
    }
    PoseContext ctx;
    ctx.ref_height = cfg_.stand_height;
    if (door) ctx.door = cfg_.object.door;
    try {
      const PoseTrajectory traj =
          build_reference_trajectory(believed, world_.robot, world_.q_arm, cfg_.pose_weights, model_, ctx);
      poses = traj.poses;
      reference = traj.reference;
      out.pose_degraded = traj.degraded;
    } catch (const PoseInfeasible&) {
      ++metrics_.pose_failures;
      out.pose_degraded = true;
      return out;
    }
    if (door)
      for (const PoseDecision& p : poses)
        metrics_.min_pose_clearance = std::min(metrics_.min_pose_clearance, door_clearance_constraint(p, cfg_.object.door));
    object_force = believed.force;  // a Baseline MPC drops it
    grip_plan = believed.grip_point;
    out.u.manip_force = -plan->force.front();  // the gripper follows the plan whatever the controller assumes
  }

  MpcProblem pr;
  pr.x0 = world_.robot;
  pr.reference = reference;
  pr.stance = stance_horizon(cfg_.gait, t, dt, n);
  pr.foot_pos = predicted_feet();
  pr.grip_pos = arm_fk(world_.robot.pos, world_.robot.euler, world_.q_arm, model_).position;
  for (const Vec3& f : object_force) pr.manip_force.push_back(-f);
  const Vec3 gripper = out.u.manip_force;
  try {
    const MpcSolution sol = mpc_.solve(pr, model_);
    out.u = sol.inputs.front();
    out.u.manip_force = gripper;
    out.mpc_degraded = sol.degraded;
  } catch (const MpcInfeasible&) {
    ++metrics_.mpc_failures;
    out.mpc_degraded = true;
  }

  out.reference = reference.front();
  out.stance = pr.stance.front();
  if (!cfg_.task) {
    out.arm = ArmCommand{cfg_.q_arm0, 0.0};
    return out;
  }
  // The arm tracks the planned grip height; run() turns it into joint targets
  // against the body pose at each physics step.
  out.grip_height = grip_plan[0].z();
  out.grip_rate = (grip_plan[1].z() - grip_plan[0].z()) / dt;
  return out;
}

RunMetrics ScenarioRunner::run() {
  const auto start = std::chrono::steady_clock::now();
  init_world();
  metrics_.min_pose_clearance = kInf;
  if (cfg_.task) metrics_.object_target = cfg_.task->target;

  const auto total_steps = static_cast<long>(std::llround(cfg_.duration / cfg_.physics_dt));
  const double ticks_per_step = cfg_.physics_dt * cfg_.control_rate;
  long next_tick = 0;
  long tick = 0;
  double arm_t0 = 0.0;

  // Before the first solve: share the weight evenly over the stance feet.
  ControllerOutput ctrl;
  for (Vec3& f : ctrl.u.foot_force) f = Vec3(0.0, 0.0, model_.mass * model_.gravity / kNumLegs);
  ctrl.reference = nominal_;
  ctrl.arm = ArmCommand{cfg_.q_arm0, 0.0};

  double sum_h2 = 0.0;
  double sum_p2 = 0.0;
  const double target = metrics_.object_target;

  auto mark_fall = [&](const std::string& reason, bool abort) {
    metrics_.fell = true;
    metrics_.aborted = abort;
    metrics_.abort_reason = reason;
    metrics_.max_height_error = std::max(metrics_.max_height_error, 0.5 * ctrl.reference.pos.z());
  };

  for (long step = 0; step < total_steps; ++step) {
    if (step == next_tick) {
      update_feet(world_.time);
      try {
        ctrl = control(ctrl);
      } catch (const std::exception& e) {
        // Solvers reject a diverged state (non-finite data) before the plant does.
        mark_fall(std::string("controller aborted: ") + e.what(), true);
        break;
      }
      arm_t0 = world_.time;
      ++tick;
      next_tick = static_cast<long>(std::llround(static_cast<double>(tick) / ticks_per_step));

      const double eh = world_.robot.pos.z() - ctrl.reference.pos.z();
      const double ep = world_.robot.euler.y() - ctrl.reference.euler.y();
      sum_h2 += eh * eh;
      sum_p2 += ep * ep;
      ++metrics_.ticks;
      if (ctrl.planner_degraded || ctrl.pose_degraded || ctrl.mpc_degraded) ++metrics_.degraded_ticks;

      TraceRow row;
      row.time = world_.time;
      row.state = world_.robot;
      row.reference = ctrl.reference;
      row.input = ctrl.u;
      row.q_arm = world_.q_arm;
      row.q_arm_ref = ctrl.grip_height ? arm_angle_for_height(world_.robot.pos, world_.robot.euler, *ctrl.grip_height,
                                                              world_.q_arm, model_)
                                       : ctrl.arm.q_ref;
      if (world_.object.present) {
        row.object_pos = world_.object.state.pos;
        row.object_vel = world_.object.state.vel;
      }
      row.stance = ctrl.stance;
      row.planner_degraded = ctrl.planner_degraded;
      row.pose_degraded = ctrl.pose_degraded;
      row.mpc_degraded = ctrl.mpc_degraded;
      metrics_.trace.push_back(std::move(row));
    } else {
      update_feet(world_.time);
    }

    ArmCommand arm = ctrl.arm;
    if (ctrl.grip_height) {
      const double z = *ctrl.grip_height + ctrl.grip_rate * (world_.time - arm_t0);
      const RobotState& b = world_.robot;
      // Reference roll and pitch: the arm must not chase body oscillations,
      // its reaction torque would feed them.
      const Vec3 euler(ctrl.reference.euler.x(), ctrl.reference.euler.y(), b.euler.z());
      arm.q_ref = arm_angle_for_height(b.pos, euler, z, world_.q_arm, model_);
      // Joint rate from where the body and target will be a moment later.
      const double h = cfg_.physics_dt;
      const Vec3 pos_next = b.pos + h * b.vel;
      const double q_next = arm_angle_for_height(pos_next, euler, z + h * ctrl.grip_rate, arm.q_ref, model_);
      arm.dq_ref = (q_next - arm.q_ref) / h;
    }
    try {
      world_ = step_physics(world_, ctrl.u, cfg_.physics_dt, model_, arm);
    } catch (const SimulationAbort& e) {
      mark_fall(e.what(), true);
      break;
    } catch (const std::domain_error& e) {
      mark_fall(std::string("simulation aborted: ") + e.what(), true);
      break;
    }

    if (cfg_.task) {
      if (cfg_.task->kind == TaskKind::DoorOpen && metrics_.handle_release_time < 0.0 &&
          world_.object.state.handle_released())
        metrics_.handle_release_time = world_.time;
      if (metrics_.target80_time < 0.0 && target != 0.0 && task_progress() / target >= 0.8)
        metrics_.target80_time = world_.time;
    }
    const double z_ref = ctrl.reference.pos.z();
    metrics_.max_height_error = std::max(metrics_.max_height_error, std::abs(world_.robot.pos.z() - z_ref));
    metrics_.max_pitch = std::max(metrics_.max_pitch, std::abs(world_.robot.euler.y()));
    if (world_.robot.pos.z() < 0.5 * z_ref) {
      mark_fall("CoM below half the reference height", false);
      break;
    }
    if (std::abs(world_.robot.euler.x()) > cfg_.tip_limit || std::abs(world_.robot.euler.y()) > cfg_.tip_limit) {
      mark_fall("body tipped past the roll/pitch limit", false);
      break;
    }
  }

  if (metrics_.ticks > 0) {
    metrics_.com_height_rmse = std::sqrt(sum_h2 / metrics_.ticks);
    metrics_.pitch_rmse = std::sqrt(sum_p2 / metrics_.ticks);
  }
  metrics_.object_final = task_progress();
  if (!std::isfinite(metrics_.min_pose_clearance)) metrics_.min_pose_clearance = 0.0;
  metrics_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics_;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("scenario config: ") + what);
  };
  require(duration > 0.0 && std::isfinite(duration), "duration must be positive");
  require(physics_dt > 0.0, "physics_dt must be positive");
  require(control_rate > 0.0 && 1.0 / control_rate >= physics_dt, "control_rate must be positive and slower than physics");
  require(stand_height > 0.0, "stand_height must be positive");
  require(initial_noise >= 0.0, "initial_noise must be non-negative");
  require(tip_limit > 0.0 && tip_limit < 1.5, "tip_limit must lie in (0, 1.5)");
  require(swing_height >= 0.0, "swing_height must be non-negative");
  robot.validate();
  gait.validate();
  pose_weights.validate();
  mpc.validate();
  if (task) {
    task->validate();
    object.validate();
    require(object.task_kind == task->kind, "object model does not match the task kind");
  }
}

RunMetrics run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioRunner runner(config);
  return runner.run();
}

}  // namespace locoman
