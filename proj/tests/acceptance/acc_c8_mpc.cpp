#include <cmath>
#include <random>

#include "locoman/loco_mpc.hpp"
#include "report.hpp"

using namespace locoman;
using namespace locoman::acceptance;

namespace {

const RobotModel kModel;

MpcProblem standing_problem(const Vec3& manip) {
  MpcProblem p;
  p.x0.pos = Vec3(0, 0, 0.4);
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

double pyramid_violation(const Vec3& f) {
  return std::max({0.0, std::abs(f.x()) - kModel.mu * f.z(), std::abs(f.y()) - kModel.mu * f.z(),
                   kModel.fz_bounds.min - f.z(), f.z() - kModel.fz_bounds.max});
}

}  // namespace

int main() {
  Report rep("8 MPC invariants");

  {
    const MpcSolution s = solve_mpc(standing_problem(Vec3::Zero()), MpcConfig{}, kModel);
    const double share = kModel.mass * kModel.gravity / 4.0;
    double worst = 0.0;
    for (const Vec3& f : s.inputs[0].foot_force)
      worst = std::max({worst, std::abs(f.z() - share) / share, f.head<2>().norm() / share});
    rep.check(s.status == SolveStatus::Optimal && worst <= 0.01, "equilibrium: m g / 4 per foot within 1%",
              "worst " + num(100.0 * worst) + "%");
  }

  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int swing_nonzero = 0, pin_off = 0, solves = 0;
  double pyramid = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    MpcProblem p = standing_problem(Vec3::Zero());
    p.x0.euler = Vec3(0.1 * u(rng), 0.1 * u(rng), 0.5 * u(rng));
    p.x0.pos += Vec3(0.03 * u(rng), 0.03 * u(rng), 0.03 * u(rng));
    p.x0.omega = Vec3(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
    p.x0.vel = Vec3(0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng));
    for (Vec3& f : p.manip_force) f = Vec3(5 * u(rng), 5 * u(rng), -40 + 10 * u(rng));
    for (int k = 0; k < 10; ++k)
      p.stance[static_cast<std::size_t>(k)] = trial % 2 ? StanceFlags{true, true, true, true}
                                              : ((k / 3) % 2 ? StanceFlags{true, false, false, true}
                                                             : StanceFlags{false, true, true, false});
    for (ControllerKind kind : {ControllerKind::Full, ControllerKind::FixedForce, ControllerKind::Baseline}) {
      MpcConfig cfg;
      cfg.kind = kind;
      const MpcSolution s = solve_mpc(p, cfg, kModel);
      ++solves;
      for (int k = 0; k < 10; ++k) {
        const ControlInput& in = s.inputs[static_cast<std::size_t>(k)];
        const StanceFlags& st = p.stance[static_cast<std::size_t>(k)];
        for (std::size_t leg = 0; leg < kNumLegs; ++leg) {
          if (!st[leg] && in.foot_force[leg] != Vec3::Zero()) ++swing_nonzero;
          if (st[leg]) pyramid = std::max(pyramid, pyramid_violation(in.foot_force[leg]));
        }
        if (kind != ControllerKind::Baseline && in.manip_force != p.manip_force[static_cast<std::size_t>(k)]) ++pin_off;
      }
    }
  }
  rep.check(swing_nonzero == 0, "swing legs carry exactly zero force", std::to_string(solves) + " solves");
  rep.check(pin_off == 0, "manipulation force equals the commanded force exactly (Full, FixedForce)");
  rep.check(pyramid <= 1e-6, "friction pyramid and normal-force bounds hold on all outputs",
            "worst violation " + num(pyramid) + " N");

  {
    MpcProblem p = standing_problem(Vec3::Zero());
    p.x0.vel = Vec3(0.1, 0.0, -0.05);
    p.x0.euler = Vec3(0.02, -0.03, 0.1);
    MpcConfig full, base;
    base.kind = ControllerKind::Baseline;
    const MpcSolution a = solve_mpc(p, full, kModel);
    const MpcSolution b = solve_mpc(p, base, kModel);
    double gap = 0.0;
    for (int k = 0; k < 10; ++k)
      gap = std::max(gap, (a.inputs[static_cast<std::size_t>(k)].to_vector() -
                           b.inputs[static_cast<std::size_t>(k)].to_vector()).norm());
    rep.check(gap <= 1e-6, "Baseline equals Full when the commanded manipulation force is zero", num(gap));
  }
  return rep.finish();
}
