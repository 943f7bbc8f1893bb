#pragma once

// Test-only reference computations. Nothing here calls into the solvers it
// is used to check.

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "locoman/pose_optimizer.hpp"
#include "locoman/qp.hpp"

namespace locoman::oracle {

/// Random strictly convex QP with `me` equalities and `mi` one-sided rows
/// C x <= up. The origin-centred box keeps it feasible.
inline QpProblem random_strictly_convex_qp(std::mt19937& rng, int n, int me, int mi) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  QpProblem p;
  p.hessian = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  p.linear.resize(n);
  for (int i = 0; i < n; ++i) p.linear(i) = 3.0 * nd(rng);
  // Equalities pass through a known point so they are consistent.
  Eigen::VectorXd x_feasible(n);
  for (int i = 0; i < n; ++i) x_feasible(i) = 0.3 * nd(rng);
  p.eq_matrix.resize(me, n);
  for (int i = 0; i < me; ++i)
    for (int j = 0; j < n; ++j) p.eq_matrix(i, j) = nd(rng);
  p.eq_rhs = p.eq_matrix * x_feasible;
  p.ineq_matrix.resize(mi, n);
  for (int i = 0; i < mi; ++i)
    for (int j = 0; j < n; ++j) p.ineq_matrix(i, j) = nd(rng);
  p.ineq_upper = p.ineq_matrix * x_feasible + Eigen::VectorXd::Constant(mi, 0.5);
  for (int i = 0; i < mi; ++i) p.ineq_upper(i) += std::abs(nd(rng));
  p.ineq_lower = Eigen::VectorXd::Constant(mi, -std::numeric_limits<double>::infinity());
  return p;
}

/// Enumerates every subset of the one-sided inequality rows as the active
/// set, solves the KKT system for each, and keeps the feasible,
/// dual-feasible candidate with the lowest objective.
inline std::optional<Eigen::VectorXd> active_set_enumeration(const QpProblem& p) {
  const int n = p.num_vars();
  const int me = p.num_eq();
  const int mi = p.num_ineq();
  std::optional<Eigen::VectorXd> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < mi; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const int k = me + static_cast<int>(act.size());
    if (k > n) continue;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    kkt.topLeftCorner(n, n) = p.hessian;
    rhs.head(n) = -p.linear;
    for (int i = 0; i < me; ++i) {
      kkt.block(n + i, 0, 1, n) = p.eq_matrix.row(i);
      kkt.block(0, n + i, n, 1) = p.eq_matrix.row(i).transpose();
      rhs(n + i) = p.eq_rhs(i);
    }
    for (std::size_t j = 0; j < act.size(); ++j) {
      const int r = n + me + static_cast<int>(j);
      kkt.block(r, 0, 1, n) = p.ineq_matrix.row(act[j]);
      kkt.block(0, r, n, 1) = p.ineq_matrix.row(act[j]).transpose();
      rhs(r) = p.ineq_upper(act[j]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    bool ok = true;
    for (std::size_t j = 0; j < act.size() && ok; ++j)
      if (sol(n + me + static_cast<int>(j)) < -1e-9) ok = false;
    if (ok && mi > 0 && ((p.ineq_matrix * x - p.ineq_upper).array() > 1e-9).any()) ok = false;
    if (!ok) continue;
    const double obj = p.objective(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  const double norm = a.lpNorm<1>();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd scaled = a / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Cost terms for the planar pose oracle. Roll and yaw are held at zero and
/// the CoM stays on the grip's y, so only pitch-plane quantities enter.
struct PlanarPoseWeights {
  double height;
  double pitch;
  double torque;
  double reg_x;
};

struct PlanarArm {
  double mount_x;
  double mount_z;
  double length;
  double q_min;
  double q_max;
  double hip_x;  // |x| of the hip offsets
  double reach_min;
  double reach_max;
  double pitch_limit;
};

struct PlanarPose {
  double pz = 0.0;
  double pitch = 0.0;
  double q = 0.0;
  double px = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

/// Evaluates every feasible configuration with the given (pz, pitch): the
/// end-effector equalities fix q (two branches) and px in closed form.
inline void planar_pose_candidates(double pz, double pitch, double gx, double gz, double fx, double fz,
                                   double ref_height, double anchor_x, const PlanarPoseWeights& w,
                                   const PlanarArm& arm, PlanarPose& best) {
  if (std::abs(pitch) > arm.pitch_limit) return;
  for (double sx : {1.0, -1.0}) {
    const double hip = pz - sx * arm.hip_x * std::sin(pitch);
    if (hip < arm.reach_min || hip > arm.reach_max) return;
  }
  // Body pitch rotates body x toward -z: world = (x c + z s, -x s + z c).
  const double c = std::cos(pitch), s = std::sin(pitch);
  const double mz = -arm.mount_x * s + arm.mount_z * c;
  const double mx = arm.mount_x * c + arm.mount_z * s;
  const double sin_rel = (gz - pz - mz) / arm.length;
  if (std::abs(sin_rel) > 1.0) return;
  const double base = std::asin(sin_rel);
  for (double rel : {base, M_PI - base}) {
    const double q = pitch + rel;
    if (q < arm.q_min || q > arm.q_max) continue;
    const double px = gx - mx - arm.length * std::cos(rel);
    const double tau = arm.length * (-std::sin(rel) * fx + std::cos(rel) * fz);
    const double cost = w.height * (pz - ref_height) * (pz - ref_height) + w.pitch * pitch * pitch +
                        w.torque * tau * tau + w.reg_x * (px - anchor_x) * (px - anchor_x);
    if (cost < best.cost) best = {pz, pitch, q, px, cost};
  }
}

/// Nested grid search over (pz, pitch): 1 mm / 0.01 rad over the whole box,
/// then two refinements at 10x finer spacing around the incumbent.
inline PlanarPose planar_pose_grid(double gx, double gz, double fx, double fz, double ref_height, double anchor_x,
                                   const PlanarPoseWeights& w, const PlanarArm& arm) {
  PlanarPose best;
  double dz = 1e-3, dp = 1e-2;
  double z_lo = 0.0, z_hi = 1.0, p_lo = -arm.pitch_limit, p_hi = arm.pitch_limit;
  for (int level = 0; level < 3; ++level) {
    const int nz = static_cast<int>(std::round((z_hi - z_lo) / dz));
    const int np = static_cast<int>(std::round((p_hi - p_lo) / dp));
    for (int i = 0; i <= nz; ++i)
      for (int j = 0; j <= np; ++j)
        planar_pose_candidates(z_lo + i * dz, p_lo + j * dp, gx, gz, fx, fz, ref_height, anchor_x, w, arm, best);
    if (!std::isfinite(best.cost)) break;
    z_lo = best.pz - 2 * dz;
    z_hi = best.pz + 2 * dz;
    p_lo = best.pitch - 2 * dp;
    p_hi = best.pitch + 2 * dp;
    dz /= 10.0;
    dp /= 10.0;
  }
  return best;
}

/// Pose constraint residuals (grip, force, leg reach, attitude and arm
/// limits, handle roll) recomputed with explicit trigonometry.
inline double pose_violation(const PoseDecision& d, const PoseTarget& t, const RobotModel& m) {
  const double cr = std::cos(d.euler.x()), sr = std::sin(d.euler.x());
  const double cp = std::cos(d.euler.y()), sp = std::sin(d.euler.y());
  const double cy = std::cos(d.euler.z()), sy = std::sin(d.euler.z());
  Eigen::Matrix3d r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp, cp * sr, cp * cr;
  const Vec3 link = m.arm_length * Vec3(std::cos(d.q_arm), 0.0, std::sin(d.q_arm));
  const Vec3 ee = d.pos + r * (m.arm_mount + link);
  double v = (ee - t.grip).cwiseAbs().maxCoeff();
  v = std::max(v, (d.manip_force - t.force).cwiseAbs().maxCoeff());
  for (const Vec3& h : m.hip_offset) {
    const double z = (d.pos + r * h).z();
    v = std::max({v, m.leg_reach.min - z, z - m.leg_reach.max});
  }
  for (int i = 0; i < 3; ++i)
    v = std::max({v, m.euler_limits[static_cast<std::size_t>(i)].min - d.euler(i),
                  d.euler(i) - m.euler_limits[static_cast<std::size_t>(i)].max});
  v = std::max({v, m.arm_limits.min - d.q_arm, d.q_arm - m.arm_limits.max});
  if (t.roll) v = std::max(v, std::abs(d.euler.x() - *t.roll));
  return v;
}

}  // namespace locoman::oracle
