#include "locoman/loco_mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "locoman/kinematics.hpp"

namespace locoman {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

StateVector MpcConfig::default_state_weights() {
  StateVector q;
  q << 400, 400, 100, 400, 400, 800, 1, 1, 1, 10, 10, 20, 0;
  return q;
}

void MpcConfig::validate() const {
  if (horizon_N < 1) throw std::invalid_argument("MpcConfig: horizon_N must be >= 1");
  if (!(horizon_T > 0.0)) throw std::invalid_argument("MpcConfig: horizon_T must be positive");
  if (!((state_weights.array() >= 0.0).all() && state_weights.allFinite()))
    throw std::invalid_argument("MpcConfig: state weights must be finite and >= 0");
  if (!((input_weights.array() >= 0.0).all() && input_weights.allFinite()))
    throw std::invalid_argument("MpcConfig: input weights must be finite and >= 0");
}

StateSpace build_state_space(double yaw, const std::array<Vec3, kNumLegs>& foot_pos, const Vec3& grip_pos,
                             const Vec3& com, const RobotModel& model, const Vec3& euler) {
  for (const Vec3& p : foot_pos)
    if (!p.allFinite()) throw std::invalid_argument("build_state_space: foot positions must be finite");
  if (!grip_pos.allFinite() || !com.allFinite())
    throw std::invalid_argument("build_state_space: grip and CoM positions must be finite");
  const Mat3 inertia = world_inertia(model, euler);
  Eigen::LDLT<Mat3> ldlt(inertia);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
    throw std::domain_error("build_state_space: world inertia is singular");
  const Mat3 inv_inertia = ldlt.solve(Mat3::Identity());

  StateSpace ss;
  ss.a = MatrixXd::Zero(kStateDim, kStateDim);
  ss.b = MatrixXd::Zero(kStateDim, kInputDim);
  // Small roll/pitch: Euler rates are the world angular velocity expressed in the yaw frame.
  ss.a.block<3, 3>(0, 6) = rot_z(yaw).transpose();
  ss.a.block<3, 3>(3, 9) = Mat3::Identity();
  ss.a(11, 12) = -1.0;
  for (int i = 0; i <= kNumLegs; ++i) {
    const Vec3 r = (i < kNumLegs ? foot_pos[static_cast<std::size_t>(i)] : grip_pos) - com;
    ss.b.block<3, 3>(6, 3 * i) = inv_inertia * skew(r);
    ss.b.block<3, 3>(9, 3 * i) = Mat3::Identity() / model.mass;
  }
  return ss;
}

StateSpace discretize(const StateSpace& c, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("discretize: dt must be positive");
  const Eigen::Index n = c.a.rows();
  const MatrixXd eye = MatrixXd::Identity(n, n);
  const MatrixXd a_dt = c.a * dt;
  StateSpace d;
  d.a = eye + a_dt + 0.5 * a_dt * a_dt;
  d.b = (eye * dt + 0.5 * dt * a_dt) * c.b;
  return d;
}

PyramidRows friction_pyramid(double mu, const Range& fz) {
  if (!(mu > 0.0)) throw std::invalid_argument("friction_pyramid: mu must be positive");
  PyramidRows p;
  p.c << 1, 0, -mu,
         1, 0, mu,
         0, 1, -mu,
         0, 1, mu,
         0, 0, 1;
  p.lower << -kInf, 0.0, -kInf, 0.0, fz.min;
  p.upper << 0.0, kInf, 0.0, kInf, fz.max;
  return p;
}

LocoMpc::LocoMpc(MpcConfig config) : config_(std::move(config)), qp_(config_.qp) { config_.validate(); }

MpcSolution LocoMpc::solve(const MpcProblem& pr, const RobotModel& model) {
  const int n = config_.horizon_N;
  if (static_cast<int>(pr.reference.size()) != n + 1 || static_cast<int>(pr.stance.size()) != n)
    throw std::invalid_argument("LocoMpc: need N+1 reference states and N stance flag sets");
  const bool use_manip = config_.kind != ControllerKind::Baseline;
  if (use_manip && static_cast<int>(pr.manip_force.size()) != n)
    throw std::invalid_argument("LocoMpc: need N manipulation forces");

  const double dt = config_.dt();
  const StateSpace d = discretize(
      build_state_space(pr.x0.euler.z(), pr.foot_pos, pr.grip_pos, pr.x0.pos, model, pr.x0.euler), dt);

  // Free-variable layout: stance feet of step 0, then step 1, ...
  std::vector<int> offset(static_cast<std::size_t>(n + 1), 0);
  for (int k = 0; k < n; ++k) {
    int count = 0;
    for (bool s : pr.stance[static_cast<std::size_t>(k)]) count += s ? 1 : 0;
    offset[static_cast<std::size_t>(k + 1)] = offset[static_cast<std::size_t>(k)] + 3 * count;
  }
  const int nu = offset.back();

  // Fixed input part: swing feet carry zero force, the gripper force is pinned.
  std::vector<VectorXd> fixed(static_cast<std::size_t>(n), VectorXd::Zero(kInputDim));
  if (use_manip)
    for (int k = 0; k < n; ++k) fixed[static_cast<std::size_t>(k)].tail<3>() = pr.manip_force[static_cast<std::size_t>(k)];

  std::vector<MatrixXd> b_free(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    MatrixXd& bf = b_free[static_cast<std::size_t>(k)];
    bf.resize(kStateDim, offset[static_cast<std::size_t>(k + 1)] - offset[static_cast<std::size_t>(k)]);
    int col = 0;
    for (int leg = 0; leg < kNumLegs; ++leg)
      if (pr.stance[static_cast<std::size_t>(k)][static_cast<std::size_t>(leg)]) {
        bf.middleCols(col, 3) = d.b.middleCols(3 * leg, 3);
        col += 3;
      }
  }

  // x_k = drift_k + gamma_k U for k = 1..N.
  MatrixXd gamma = MatrixXd::Zero(kStateDim * n, nu);
  VectorXd drift(kStateDim * n);
  VectorXd x = pr.x0.to_vector();
  for (int k = 1; k <= n; ++k) {
    x = d.a * x + d.b * fixed[static_cast<std::size_t>(k - 1)];
    drift.segment(kStateDim * (k - 1), kStateDim) = x;
    if (k > 1)
      gamma.block(kStateDim * (k - 1), 0, kStateDim, nu) = d.a * gamma.block(kStateDim * (k - 2), 0, kStateDim, nu);
    const int c0 = offset[static_cast<std::size_t>(k - 1)];
    const int cw = offset[static_cast<std::size_t>(k)] - c0;
    gamma.block(kStateDim * (k - 1), c0, kStateDim, cw) = b_free[static_cast<std::size_t>(k - 1)];
  }

  VectorXd q_bar(kStateDim * n);
  VectorXd err(kStateDim * n);
  for (int k = 1; k <= n; ++k) {
    q_bar.segment(kStateDim * (k - 1), kStateDim) = config_.state_weights;
    err.segment(kStateDim * (k - 1), kStateDim) =
        drift.segment(kStateDim * (k - 1), kStateDim) - pr.reference[static_cast<std::size_t>(k)].to_vector();
  }
  VectorXd r_bar(nu);
  for (int k = 0; k < n; ++k) {
    int col = offset[static_cast<std::size_t>(k)];
    for (int leg = 0; leg < kNumLegs; ++leg)
      if (pr.stance[static_cast<std::size_t>(k)][static_cast<std::size_t>(leg)]) {
        r_bar.segment(col, 3) = config_.input_weights.segment<3>(3 * leg);
        col += 3;
      }
  }

  MatrixXd hess = 2.0 * gamma.transpose() * q_bar.asDiagonal() * gamma;
  hess.diagonal() += 2.0 * r_bar;
  hess = 0.5 * (hess + hess.transpose());
  const VectorXd lin = 2.0 * gamma.transpose() * q_bar.cwiseProduct(err);

  QpProblem qp = QpProblem::unconstrained(hess, lin);
  const PyramidRows pyr = friction_pyramid(model.mu, model.fz_bounds);
  const int rows = 5 * (nu / 3);
  qp.ineq_matrix = MatrixXd::Zero(rows, nu);
  qp.ineq_lower.resize(rows);
  qp.ineq_upper.resize(rows);
  for (int f = 0; f < nu / 3; ++f) {
    qp.ineq_matrix.block<5, 3>(5 * f, 3 * f) = pyr.c;
    qp.ineq_lower.segment<5>(5 * f) = pyr.lower;
    qp.ineq_upper.segment<5>(5 * f) = pyr.upper;
  }

  if (warm_ && warm_->x.size() != nu) warm_.reset();
  const SolveReport rep = qp_.solve(qp, warm_);
  if (rep.status == SolveStatus::Infeasible) {
    warm_.reset();
    throw MpcInfeasible("friction pyramid", "locomotion MPC infeasible: friction pyramid and force bounds conflict");
  }
  warm_ = QpWarmStart{rep.solution, rep.eq_multipliers, rep.ineq_multipliers};

  MpcSolution out;
  out.status = rep.status;
  out.iterations = rep.iterations;
  out.degraded = rep.status != SolveStatus::Optimal;
  out.predicted.push_back(pr.x0);
  VectorXd xk = pr.x0.to_vector();
  for (int k = 0; k < n; ++k) {
    InputVector u = fixed[static_cast<std::size_t>(k)];
    int col = offset[static_cast<std::size_t>(k)];
    for (int leg = 0; leg < kNumLegs; ++leg)
      if (pr.stance[static_cast<std::size_t>(k)][static_cast<std::size_t>(leg)]) {
        // The operator-splitting iterate can sit a relative tolerance outside the
        // pyramid when the active set is degenerate (an unloaded foot); snap it back.
        Vec3 f = rep.solution.segment(col, 3);
        f.z() = model.fz_bounds.clamp(f.z());
        const double lim = model.mu * f.z();
        f.x() = std::clamp(f.x(), -lim, lim);
        f.y() = std::clamp(f.y(), -lim, lim);
        u.segment<3>(3 * leg) = f;
        col += 3;
      }
    out.inputs.push_back(ControlInput::from_vector(u));
    xk = d.a * xk + d.b * VectorXd(u);
    out.predicted.push_back(RobotState::from_vector(xk));
  }
  return out;
}

MpcSolution solve_mpc(const MpcProblem& problem, const MpcConfig& config, const RobotModel& model) {
  return LocoMpc(config).solve(problem, model);
}

}  // namespace locoman
