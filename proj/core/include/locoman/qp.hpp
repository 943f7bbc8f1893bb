#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

namespace locoman {

/// min 0.5 x'Hx + g'x  s.t.  E x = b,  lo <= C x <= up.
/// Use +/-infinity in lo/up for one-sided rows.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_lower;
  Eigen::VectorXd ineq_upper;

  [[nodiscard]] int num_vars() const { return static_cast<int>(linear.size()); }
  [[nodiscard]] int num_eq() const { return static_cast<int>(eq_rhs.size()); }
  [[nodiscard]] int num_ineq() const { return static_cast<int>(ineq_lower.size()); }
  [[nodiscard]] double objective(const Eigen::VectorXd& x) const;

  /// Allocates an n-variable problem with no constraints.
  static QpProblem unconstrained(const Eigen::MatrixXd& h, const Eigen::VectorXd& g);

  /// Throws std::invalid_argument on inconsistent dimensions, asymmetric
  /// Hessian, or lower > upper.
  void validate() const;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };

std::string to_string(SolveStatus s);

struct SolveReport {
  Eigen::VectorXd solution;
  SolveStatus status = SolveStatus::MaxIter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  // Multipliers in the convention H x + g + E'eq + C'ineq = 0;
  // ineq > 0 marks an active upper bound, < 0 an active lower bound.
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
  bool polished = false;

  [[nodiscard]] bool ok() const { return status == SolveStatus::Optimal; }
};

struct QpSettings {
  double tol = 1e-6;
  int max_iter = 4000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;             // over-relaxation
  int adapt_interval = 25;        // iterations between penalty rescaling checks
  double infeasibility_tol = 1e-6;
  bool polish = true;
};

struct QpWarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
};

/// Operator-splitting QP solver. Holds factorization workspace, so keep one
/// instance per thread.
class QpSolver {
 public:
  explicit QpSolver(QpSettings settings = {});

  SolveReport solve(const QpProblem& problem, const std::optional<QpWarmStart>& warm = std::nullopt);

  [[nodiscard]] const QpSettings& settings() const { return settings_; }

 private:
  QpSettings settings_;
};

SolveReport solve_qp(const QpProblem& problem, double tol = 1e-6, int max_iter = 4000);

}  // namespace locoman
