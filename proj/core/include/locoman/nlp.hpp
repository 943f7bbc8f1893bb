#pragma once

#include <functional>

#include <Eigen/Dense>

#include "locoman/qp.hpp"

namespace locoman {

/// min f(x)  s.t.  c(x) = 0,  h_lo <= h(x) <= h_up,  x_lo <= x <= x_up.
/// Derivatives default to central finite differences; supply `cost_gradient`
/// to override the cost gradient.
struct NlpProblem {
  using Scalar = std::function<double(const Eigen::VectorXd&)>;
  using Vector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  int num_vars = 0;
  Scalar cost;
  Vector cost_gradient;     // optional
  Vector eq_constraints;    // optional
  Vector ineq_constraints;  // optional
  Eigen::VectorXd ineq_lower;
  Eigen::VectorXd ineq_upper;
  Eigen::VectorXd lower_bounds;  // empty = unbounded
  Eigen::VectorXd upper_bounds;
};

struct NlpOptions {
  double tol = 1e-8;       // stationarity, relative to max(1, cost gradient)
  double feas_tol = 1e-8;  // constraint violation
  int max_iter = 100;
  double fd_relative_step = 1e-6;
  QpSettings qp{1e-10, 4000};
};

/// Central-difference gradient with step h_i = rel_step * max(1, |x_i|).
Eigen::VectorXd fd_gradient(const NlpProblem::Scalar& f, const Eigen::VectorXd& x, double rel_step = 1e-6);
/// Central-difference Jacobian, one row per output.
Eigen::MatrixXd fd_jacobian(const NlpProblem::Vector& f, const Eigen::VectorXd& x, double rel_step = 1e-6);

/// Sequential quadratic programming with a damped BFGS Hessian, an l1 merit
/// line search, and an elastic restoration step when the linearized
/// constraints are inconsistent.
class SqpSolver {
 public:
  explicit SqpSolver(NlpOptions options = {});

  SolveReport solve(const NlpProblem& problem, const Eigen::VectorXd& x0);

  [[nodiscard]] const NlpOptions& options() const { return options_; }

 private:
  NlpOptions options_;
  QpSolver qp_;
};

SolveReport solve_nlp(const NlpProblem& problem, const Eigen::VectorXd& x0, const NlpOptions& options = {});

}  // namespace locoman
