#include "locoman/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace locoman {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

struct Evaluation {
  VectorXd x;
  double f = 0.0;
  VectorXd grad;
  VectorXd c;
  MatrixXd jc;
  VectorXd h;
  MatrixXd jh;
};

class Problem {
 public:
  Problem(const NlpProblem& p, double rel_step) : p_(p), rel_step_(rel_step) {
    const int n = p.num_vars;
    lo_ = p.lower_bounds.size() == n ? p.lower_bounds : VectorXd::Constant(n, -kInf);
    up_ = p.upper_bounds.size() == n ? p.upper_bounds : VectorXd::Constant(n, kInf);
    for (int i = 0; i < n; ++i)
      if (std::isfinite(lo_(i)) || std::isfinite(up_(i))) boxed_.push_back(i);
  }

  [[nodiscard]] int n() const { return p_.num_vars; }
  [[nodiscard]] const VectorXd& lo() const { return lo_; }
  [[nodiscard]] const VectorXd& up() const { return up_; }
  [[nodiscard]] const std::vector<int>& boxed() const { return boxed_; }

  [[nodiscard]] VectorXd eq(const VectorXd& x) const { return p_.eq_constraints ? p_.eq_constraints(x) : VectorXd(); }
  [[nodiscard]] VectorXd ineq(const VectorXd& x) const {
    return p_.ineq_constraints ? p_.ineq_constraints(x) : VectorXd();
  }

  [[nodiscard]] Evaluation evaluate(const VectorXd& x) const {
    Evaluation e;
    e.x = x;
    e.f = p_.cost(x);
    e.grad = p_.cost_gradient ? p_.cost_gradient(x) : fd_gradient(p_.cost, x, rel_step_);
    e.c = eq(x);
    e.jc = p_.eq_constraints ? fd_jacobian(p_.eq_constraints, x, rel_step_) : MatrixXd(0, n());
    e.h = ineq(x);
    e.jh = p_.ineq_constraints ? fd_jacobian(p_.ineq_constraints, x, rel_step_) : MatrixXd(0, n());
    if (e.h.size() != p_.ineq_lower.size() || e.h.size() != p_.ineq_upper.size())
      throw std::invalid_argument("NlpProblem: inequality bounds do not match constraint count");
    return e;
  }

  // l1 measure of constraint violation.
  [[nodiscard]] double violation(const VectorXd& x, const VectorXd& c, const VectorXd& h) const {
    double v = c.size() ? c.lpNorm<1>() : 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i)
      v += std::max({0.0, p_.ineq_lower(i) - h(i), h(i) - p_.ineq_upper(i)});
    for (int i : boxed_) v += std::max({0.0, lo_(i) - x(i), x(i) - up_(i)});
    return v;
  }

  [[nodiscard]] double max_violation(const VectorXd& x, const VectorXd& c, const VectorXd& h) const {
    double v = inf_norm(c);
    for (Eigen::Index i = 0; i < h.size(); ++i)
      v = std::max({v, p_.ineq_lower(i) - h(i), h(i) - p_.ineq_upper(i)});
    for (int i : boxed_) v = std::max({v, lo_(i) - x(i), x(i) - up_(i)});
    return v;
  }

  [[nodiscard]] double merit(const VectorXd& x, double penalty) const {
    return p_.cost(x) + penalty * violation(x, eq(x), ineq(x));
  }

  [[nodiscard]] const NlpProblem& raw() const { return p_; }

 private:
  const NlpProblem& p_;
  double rel_step_;
  VectorXd lo_;
  VectorXd up_;
  std::vector<int> boxed_;
};

// Rows of the linearized inequality block: general constraints then box rows.
QpProblem build_subproblem(const Problem& prob, const Evaluation& e, const MatrixXd& hessian) {
  const int n = prob.n();
  const auto mh = e.h.size();
  const auto mb = static_cast<Eigen::Index>(prob.boxed().size());
  QpProblem qp;
  qp.hessian = hessian;
  qp.linear = e.grad;
  qp.eq_matrix = e.jc;
  qp.eq_rhs = -e.c;
  qp.ineq_matrix = MatrixXd::Zero(mh + mb, n);
  qp.ineq_lower.resize(mh + mb);
  qp.ineq_upper.resize(mh + mb);
  if (mh > 0) {
    qp.ineq_matrix.topRows(mh) = e.jh;
    qp.ineq_lower.head(mh) = prob.raw().ineq_lower - e.h;
    qp.ineq_upper.head(mh) = prob.raw().ineq_upper - e.h;
  }
  for (Eigen::Index j = 0; j < mb; ++j) {
    const int i = prob.boxed()[static_cast<std::size_t>(j)];
    qp.ineq_matrix(mh + j, i) = 1.0;
    qp.ineq_lower(mh + j) = prob.lo()(i) - e.x(i);
    qp.ineq_upper(mh + j) = prob.up()(i) - e.x(i);
  }
  return qp;
}

// Elastic restoration: min t + eps|d|^2 with every constraint relaxed by t.
QpProblem build_restoration(const Problem& prob, const Evaluation& e) {
  const int n = prob.n();
  const auto me = e.c.size();
  const auto mh = e.h.size();
  const auto mb = static_cast<Eigen::Index>(prob.boxed().size());
  const Eigen::Index rows = 2 * me + mh + mb + 1;
  QpProblem qp;
  qp.hessian = MatrixXd::Zero(n + 1, n + 1);
  qp.hessian.topLeftCorner(n, n).diagonal().setConstant(1e-6);
  qp.linear = VectorXd::Zero(n + 1);
  qp.linear(n) = 1.0;
  qp.eq_matrix.resize(0, n + 1);
  qp.eq_rhs.resize(0);
  qp.ineq_matrix = MatrixXd::Zero(rows, n + 1);
  qp.ineq_lower = VectorXd::Constant(rows, -kInf);
  qp.ineq_upper = VectorXd::Constant(rows, kInf);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < me; ++i, r += 2) {
    qp.ineq_matrix.block(r, 0, 1, n) = e.jc.row(i);
    qp.ineq_matrix(r, n) = -1.0;
    qp.ineq_upper(r) = -e.c(i);
    qp.ineq_matrix.block(r + 1, 0, 1, n) = e.jc.row(i);
    qp.ineq_matrix(r + 1, n) = 1.0;
    qp.ineq_lower(r + 1) = -e.c(i);
  }
  for (Eigen::Index i = 0; i < mh; ++i, ++r) {
    // lo - h - t <= J d  and  J d <= up - h + t, folded into one row when only one side is finite.
    qp.ineq_matrix.block(r, 0, 1, n) = e.jh.row(i);
    const double lo = prob.raw().ineq_lower(i) - e.h(i);
    const double up = prob.raw().ineq_upper(i) - e.h(i);
    if (std::isfinite(up)) {
      qp.ineq_matrix(r, n) = -1.0;
      qp.ineq_upper(r) = up;
    } else {
      qp.ineq_matrix(r, n) = 1.0;
      qp.ineq_lower(r) = lo;
    }
  }
  for (Eigen::Index j = 0; j < mb; ++j, ++r) {
    const int i = prob.boxed()[static_cast<std::size_t>(j)];
    qp.ineq_matrix(r, i) = 1.0;
    qp.ineq_lower(r) = prob.lo()(i) - e.x(i);
    qp.ineq_upper(r) = prob.up()(i) - e.x(i);
  }
  qp.ineq_matrix(r, n) = 1.0;
  qp.ineq_lower(r) = 0.0;
  return qp;
}

VectorXd stationarity(const Problem& prob, const Evaluation& e, const SolveReport& qp) {
  VectorXd r = e.grad;
  if (e.c.size()) r += e.jc.transpose() * qp.eq_multipliers;
  const auto mh = e.h.size();
  if (mh) r += e.jh.transpose() * qp.ineq_multipliers.head(mh);
  for (std::size_t j = 0; j < prob.boxed().size(); ++j)
    r(prob.boxed()[j]) += qp.ineq_multipliers(mh + static_cast<Eigen::Index>(j));
  return r;
}

VectorXd lagrangian_gradient(const Problem& prob, const Evaluation& e, const SolveReport& qp) {
  return stationarity(prob, e, qp);
}

}  // namespace

VectorXd fd_gradient(const NlpProblem::Scalar& f, const VectorXd& x, double rel_step) {
  VectorXd g(x.size());
  VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

MatrixXd fd_jacobian(const NlpProblem::Vector& f, const VectorXd& x, double rel_step) {
  VectorXd xp = x;
  const VectorXd f0 = f(x);
  MatrixXd j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    const VectorXd fp = f(xp);
    xp(i) = x(i) - h;
    const VectorXd fm = f(xp);
    xp(i) = x(i);
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

SqpSolver::SqpSolver(NlpOptions options) : options_(options), qp_(options.qp) {}

SolveReport SqpSolver::solve(const NlpProblem& problem, const VectorXd& x0) {
  if (!problem.cost) throw std::invalid_argument("NlpProblem: cost is required");
  if (x0.size() != problem.num_vars) throw std::invalid_argument("NlpProblem: x0 has wrong dimension");
  const Problem prob(problem, options_.fd_relative_step);
  const int n = prob.n();

  VectorXd x = x0.cwiseMax(prob.lo()).cwiseMin(prob.up());
  Evaluation e = prob.evaluate(x);
  MatrixXd hess = MatrixXd::Identity(n, n);
  bool hess_scaled = false;
  double penalty = 1.0;
  std::optional<QpWarmStart> warm;

  SolveReport report;
  report.status = SolveStatus::MaxIter;

  for (int iter = 1; iter <= options_.max_iter; ++iter) {
    report.iterations = iter;
    const QpProblem sub = build_subproblem(prob, e, hess);
    SolveReport step = qp_.solve(sub, warm);

    if (step.status != SolveStatus::Optimal && step.primal_residual > options_.feas_tol) {
      // Linearization inconsistent: try to reduce the violation instead.
      const double v0 = prob.max_violation(x, e.c, e.h);
      const SolveReport rest = qp_.solve(build_restoration(prob, e));
      const double t = rest.solution(n);
      if (rest.status == SolveStatus::Infeasible || t >= 0.9 * v0) {
        report.status = SolveStatus::Infeasible;
        break;
      }
      const VectorXd d = rest.solution.head(n);
      double alpha = 1.0;
      const double l1_0 = prob.violation(x, e.c, e.h);
      VectorXd trial = x + d;
      for (int ls = 0; ls < 30; ++ls) {
        trial = x + alpha * d;
        if (prob.violation(trial, prob.eq(trial), prob.ineq(trial)) < l1_0) break;
        alpha *= 0.5;
      }
      x = trial;
      e = prob.evaluate(x);
      warm.reset();
      continue;
    }

    const VectorXd d = step.solution;
    const VectorXd r = stationarity(prob, e, step);
    const double viol = prob.max_violation(x, e.c, e.h);
    report.solution = x;
    report.dual_residual = inf_norm(r);
    report.primal_residual = viol;
    report.eq_multipliers = step.eq_multipliers;
    report.ineq_multipliers = step.ineq_multipliers;
    // Stationarity is judged relative to the cost gradient scale so weights can be rescaled freely.
    const double dual_tol = options_.tol * std::max(1.0, inf_norm(e.grad));
    if (report.dual_residual <= dual_tol && viol <= options_.feas_tol) {
      report.status = SolveStatus::Optimal;
      return report;
    }
    // A vanishing step from a feasible point is a KKT point of the local model;
    // finite-difference noise can keep the measured residual just above tol.
    if (viol <= options_.feas_tol && inf_norm(d) <= 1e-9 * (1.0 + inf_norm(x))) {
      report.status = SolveStatus::Optimal;
      return report;
    }
    if (inf_norm(d) <= 1e-14 * (1.0 + inf_norm(x))) break;  // stalled

    const double multiplier_norm =
        std::max(inf_norm(step.eq_multipliers), inf_norm(step.ineq_multipliers));
    if (penalty < 1.1 * multiplier_norm) penalty = 2.0 * multiplier_norm;

    const double l1 = prob.violation(x, e.c, e.h);
    const double phi0 = e.f + penalty * l1;
    const double slope = e.grad.dot(d) - penalty * l1;
    double alpha = 1.0;
    VectorXd trial = x + d;
    for (int ls = 0; ls < 40; ++ls) {
      trial = (x + alpha * d).cwiseMax(prob.lo()).cwiseMin(prob.up());
      if (prob.merit(trial, penalty) <= phi0 + 1e-4 * alpha * std::min(slope, 0.0)) break;
      alpha *= 0.5;
    }

    Evaluation next = prob.evaluate(trial);
    const VectorXd s = trial - x;
    VectorXd yv = lagrangian_gradient(prob, next, step) - lagrangian_gradient(prob, e, step);
    const double sy = s.dot(yv);
    if (s.norm() > 1e-16) {
      if (!hess_scaled && sy > 1e-16) {
        hess = MatrixXd::Identity(n, n) * (yv.squaredNorm() / sy);
        hess_scaled = true;
      }
      const VectorXd bs = hess * s;
      const double sbs = s.dot(bs);
      if (sbs > 1e-300) {
        if (sy < 0.2 * sbs) {
          const double theta = 0.8 * sbs / (sbs - sy);
          yv = theta * yv + (1.0 - theta) * bs;
        }
        const double sy_damped = s.dot(yv);
        if (sy_damped > 1e-300) {
          hess += yv * yv.transpose() / sy_damped - bs * bs.transpose() / sbs;
          hess = 0.5 * (hess + hess.transpose());
        }
      }
    }
    x = trial;
    e = std::move(next);
    warm = QpWarmStart{VectorXd(), step.eq_multipliers, step.ineq_multipliers};
  }

  report.solution = x;
  report.primal_residual = prob.max_violation(x, e.c, e.h);
  return report;
}

SolveReport solve_nlp(const NlpProblem& problem, const VectorXd& x0, const NlpOptions& options) {
  return SqpSolver(options).solve(problem, x0);
}

}  // namespace locoman
