#include <cmath>
#include <random>

#include "locoman/kinematics.hpp"
#include "locoman/pose_optimizer.hpp"
#include "locoman/qp.hpp"
#include "oracles.hpp"
#include "report.hpp"

using namespace locoman;
using namespace locoman::acceptance;

int main() {
  Report rep("6 solver oracles");

  std::mt19937 rng(6);
  std::uniform_int_distribution<int> nd(2, 10);
  int matched = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = nd(rng);
    const int me = std::uniform_int_distribution<int>(0, std::min(2, n - 1))(rng);
    const int mi = std::uniform_int_distribution<int>(1, 10)(rng);
    const QpProblem p = oracle::random_strictly_convex_qp(rng, n, me, mi);
    const auto ref = oracle::active_set_enumeration(p);
    const SolveReport r = solve_qp(p);
    if (!ref || !r.ok()) continue;
    const double gap = std::abs(p.objective(r.solution) - p.objective(*ref));
    worst = std::max(worst, gap);
    if (gap <= 1e-6) ++matched;
  }
  rep.check(matched == 50, "50 random strictly convex QPs (n <= 10) match active-set enumeration within 1e-6",
            std::to_string(matched) + "/50, worst gap " + num(worst));

  const RobotModel model;
  const oracle::PlanarArm arm{model.arm_mount.x(), model.arm_mount.z(), model.arm_length, model.arm_limits.min,
                              model.arm_limits.max, std::abs(model.hip_offset[0].x()), model.leg_reach.min,
                              model.leg_reach.max, model.euler_limits[1].max};
  const PoseWeights w;
  int close = 0;
  double worst_rel = 0.0;
  for (int i = 0; i < 10; ++i) {
    PoseTarget t;
    t.grip = Vec3(0.70 + 0.012 * i, 0.0, 0.28 + 0.035 * i);
    t.force = Vec3(0.0, 0.0, (1.0 + i) * model.gravity);
    t.ref_height = 0.4;
    const PoseResult r = solve_pose(t, w, model, PoseDecision{});
    const auto o = oracle::planar_pose_grid(t.grip.x(), t.grip.z(), 0.0, t.force.z(), 0.4, 0.0,
                                            {w.w_height, w.w_euler.y(), w.w_torque, w.w_reg_xy}, arm);
    if (r.status != SolveStatus::Optimal || !std::isfinite(o.cost)) continue;
    const double rel = std::abs(r.cost - o.cost) / o.cost;
    worst_rel = std::max(worst_rel, rel);
    if (rel <= 0.01) ++close;
  }
  rep.check(close == 10, "pose optimizer matches grid-search oracle within 1% cost on 10 targets",
            std::to_string(close) + "/10, worst " + num(100.0 * worst_rel) + "%");
  return rep.finish();
}
