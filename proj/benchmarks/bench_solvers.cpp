#include <benchmark/benchmark.h>

#include <random>

#include "locoman/loco_mpc.hpp"
#include "locoman/object_planner.hpp"
#include "locoman/pose_optimizer.hpp"
#include "locoman/qp.hpp"
#include "locoman/scenario.hpp"

using namespace locoman;

namespace {

const RobotModel kModel;

QpProblem random_qp(int n) {
  std::mt19937 rng(static_cast<unsigned>(n));
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q(i) = nd(rng);
  QpProblem p = QpProblem::unconstrained(m * m.transpose() + Eigen::MatrixXd::Identity(n, n), q);
  p.ineq_matrix = Eigen::MatrixXd::Identity(n, n);
  p.ineq_lower = Eigen::VectorXd::Constant(n, -0.5);
  p.ineq_upper = Eigen::VectorXd::Constant(n, 0.5);
  return p;
}

MpcProblem standing_problem(const Vec3& manip) {
  MpcProblem p;
  p.x0.pos = Vec3(0, 0, 0.4);
  p.x0.vel = Vec3(0.1, 0.0, 0.0);
  p.reference.assign(11, p.x0);
  p.stance.assign(10, StanceFlags{true, true, true, true});
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    p.foot_pos[i] = p.x0.pos + kModel.hip_offset[i];
    p.foot_pos[i].z() = 0.0;
  }
  p.grip_pos = Vec3(0.6, 0.0, 0.4);
  p.manip_force.assign(10, manip);
  return p;
}

}  // namespace

static void BM_Qp(benchmark::State& state) {
  const QpProblem p = random_qp(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p));
}
BENCHMARK(BM_Qp)->Arg(10)->Arg(40)->Arg(150);

static void BM_PoseSolve(benchmark::State& state) {
  PoseTarget t;
  t.grip = Vec3(0.8, 0.0, 0.55);
  t.force = Vec3(0.0, 0.0, 10.0 * kModel.gravity);
  for (auto _ : state) benchmark::DoNotOptimize(solve_pose(t, PoseWeights{}, kModel, PoseDecision{}));
}
BENCHMARK(BM_PoseSolve);

static void BM_MpcSolve(benchmark::State& state) {
  const MpcProblem p = standing_problem(Vec3(0, 0, -50));
  MpcConfig cfg;
  cfg.kind = state.range(0) ? ControllerKind::Full : ControllerKind::Baseline;
  for (auto _ : state) benchmark::DoNotOptimize(solve_mpc(p, cfg, kModel));
}
BENCHMARK(BM_MpcSolve)->Arg(1)->Arg(0);

static void BM_LiftPlan(benchmark::State& state) {
  TaskCommand cmd;
  cmd.target = 0.2;
  cmd.duration = 0.5;
  const ObjectModel model = ObjectModel::lift(10.0);
  ObjectState s = ObjectState::at_rest(Eigen::VectorXd::Constant(1, 0.3));
  s.elapsed = 0.1;
  ObjectPlanner planner;
  for (auto _ : state) benchmark::DoNotOptimize(planner.plan(cmd, model, s, 0.05, 10));
}
BENCHMARK(BM_LiftPlan);

// One second of the full loop: 30 control ticks and 1000 physics steps.
static void BM_LiftScenarioSecond(benchmark::State& state) {
  ScenarioConfig c;
  c.duration = 1.0;
  c.front_foot_shift = 0.2;
  c.q_arm0 = 0.4;
  TaskCommand t;
  t.target = 0.2;
  t.duration = 0.5;
  c.task = t;
  c.object = ObjectModel::lift(10.0);
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c));
}
BENCHMARK(BM_LiftScenarioSecond)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
