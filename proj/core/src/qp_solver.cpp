#include "locoman/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace locoman {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqRhoScale = 1e3;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// All constraints stacked as l <= A x <= u, equalities first.
struct StackedProblem {
  MatrixXd a;
  VectorXd l;
  VectorXd u;
  int num_eq = 0;
};

StackedProblem stack(const QpProblem& p) {
  StackedProblem s;
  const int n = p.num_vars();
  const int me = p.num_eq();
  const int mi = p.num_ineq();
  s.num_eq = me;
  s.a.resize(me + mi, n);
  s.l.resize(me + mi);
  s.u.resize(me + mi);
  if (me > 0) {
    s.a.topRows(me) = p.eq_matrix;
    s.l.head(me) = p.eq_rhs;
    s.u.head(me) = p.eq_rhs;
  }
  if (mi > 0) {
    s.a.bottomRows(mi) = p.ineq_matrix;
    s.l.tail(mi) = p.ineq_lower;
    s.u.tail(mi) = p.ineq_upper;
  }
  return s;
}

VectorXd clip(const VectorXd& v, const VectorXd& lo, const VectorXd& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

VectorXd row_penalties(const StackedProblem& s, double rho) {
  VectorXd r(s.l.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (std::isinf(s.l(i)) && std::isinf(s.u(i))) {
      r(i) = kRhoMin;
    } else if (s.u(i) - s.l(i) < 1e-12) {
      r(i) = kEqRhoScale * rho;
    } else {
      r(i) = rho;
    }
  }
  return r;
}

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double primal_scale = 0.0;
  double dual_scale = 0.0;
};

Residuals residuals(const QpProblem& p, const StackedProblem& s, const VectorXd& x, const VectorXd& z,
                    const VectorXd& y) {
  Residuals r;
  const VectorXd ax = s.a * x;
  const VectorXd px = p.hessian * x;
  const VectorXd aty = s.a.transpose() * y;
  r.primal = inf_norm(ax - z);
  r.dual = inf_norm(px + p.linear + aty);
  r.primal_scale = std::max(inf_norm(ax), inf_norm(z));
  r.dual_scale = std::max({inf_norm(px), inf_norm(aty), inf_norm(p.linear)});
  return r;
}

// Distance of A x outside [l, u].
double constraint_violation(const StackedProblem& s, const VectorXd& x) {
  if (s.l.size() == 0) return 0.0;
  const VectorXd ax = s.a * x;
  return inf_norm((s.l - ax).cwiseMax(0.0).cwiseMax(ax - s.u));
}

bool primal_infeasible(const StackedProblem& s, const VectorXd& dy, double eps) {
  const double norm_dy = inf_norm(dy);
  if (norm_dy < 1e-12) return false;
  if (inf_norm(s.a.transpose() * dy) > eps * norm_dy) return false;
  double support = 0.0;
  for (Eigen::Index i = 0; i < dy.size(); ++i) {
    if (dy(i) > 0.0) {
      if (std::isinf(s.u(i))) return false;
      support += s.u(i) * dy(i);
    } else if (dy(i) < 0.0) {
      if (std::isinf(s.l(i))) return false;
      support += s.l(i) * dy(i);
    }
  }
  return support < -eps * norm_dy;
}

struct PolishResult {
  VectorXd x;
  VectorXd y;
  bool ok = false;
};

// Solve the equality-constrained KKT system on the guessed active set.
PolishResult polish(const QpProblem& p, const StackedProblem& s, const VectorXd& z, const VectorXd& y, double tol) {
  const int n = p.num_vars();
  const int m = static_cast<int>(s.l.size());
  std::vector<int> active;
  std::vector<double> rhs;
  for (int i = 0; i < m; ++i) {
    if (i < s.num_eq || s.u(i) - s.l(i) < 1e-12) {
      active.push_back(i);
      rhs.push_back(s.l(i));
    } else if (z(i) - s.l(i) < -y(i)) {
      active.push_back(i);
      rhs.push_back(s.l(i));
    } else if (s.u(i) - z(i) < y(i)) {
      active.push_back(i);
      rhs.push_back(s.u(i));
    }
  }
  const int k = static_cast<int>(active.size());
  MatrixXd kkt = MatrixXd::Zero(n + k, n + k);
  VectorXd b(n + k);
  kkt.topLeftCorner(n, n) = p.hessian;
  b.head(n) = -p.linear;
  for (int j = 0; j < k; ++j) {
    kkt.block(n + j, 0, 1, n) = s.a.row(active[static_cast<std::size_t>(j)]);
    kkt.block(0, n + j, n, 1) = s.a.row(active[static_cast<std::size_t>(j)]).transpose();
    b(n + j) = rhs[static_cast<std::size_t>(j)];
  }
  // Small regularization keeps degenerate active sets solvable; refinement
  // against the unregularized matrix removes the bias.
  constexpr double delta = 1e-9;
  MatrixXd reg = kkt;
  reg.topLeftCorner(n, n).diagonal().array() += delta;
  if (k > 0) reg.bottomRightCorner(k, k).diagonal().array() -= delta;
  Eigen::PartialPivLU<MatrixXd> lu(reg);
  VectorXd sol = lu.solve(b);
  for (int it = 0; it < 5; ++it) sol += lu.solve(b - kkt * sol);
  if (!sol.allFinite()) return {};

  PolishResult out;
  out.x = sol.head(n);
  out.y = VectorXd::Zero(m);
  for (int j = 0; j < k; ++j) out.y(active[static_cast<std::size_t>(j)]) = sol(n + j);

  // Active lower bounds need non-positive multipliers, upper ones non-negative.
  for (int j = 0; j < k; ++j) {
    const int i = active[static_cast<std::size_t>(j)];
    if (i < s.num_eq || s.u(i) - s.l(i) < 1e-12) continue;
    const bool at_lower = rhs[static_cast<std::size_t>(j)] == s.l(i);
    if (at_lower && out.y(i) > tol) return {};
    if (!at_lower && out.y(i) < -tol) return {};
  }
  if (constraint_violation(s, out.x) > tol) return {};
  out.ok = true;
  return out;
}

}  // namespace

double QpProblem::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x);
}

QpProblem QpProblem::unconstrained(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
  QpProblem p;
  const auto n = g.size();
  p.hessian = h;
  p.linear = g;
  p.eq_matrix.resize(0, n);
  p.eq_rhs.resize(0);
  p.ineq_matrix.resize(0, n);
  p.ineq_lower.resize(0);
  p.ineq_upper.resize(0);
  return p;
}

void QpProblem::validate() const {
  const auto n = linear.size();
  if (hessian.rows() != n || hessian.cols() != n) throw std::invalid_argument("QpProblem: hessian must be n x n");
  if ((hessian - hessian.transpose()).lpNorm<Eigen::Infinity>() > 1e-10 * std::max(1.0, hessian.lpNorm<Eigen::Infinity>()))
    throw std::invalid_argument("QpProblem: hessian is not symmetric");
  if (eq_matrix.rows() != eq_rhs.size() || (eq_matrix.rows() > 0 && eq_matrix.cols() != n))
    throw std::invalid_argument("QpProblem: equality block dimensions mismatch");
  if (ineq_matrix.rows() != ineq_lower.size() || ineq_lower.size() != ineq_upper.size() ||
      (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n))
    throw std::invalid_argument("QpProblem: inequality block dimensions mismatch");
  if ((ineq_lower.array() > ineq_upper.array()).any())
    throw std::invalid_argument("QpProblem: ineq_lower exceeds ineq_upper");
  if (!hessian.allFinite() || !linear.allFinite() || !eq_matrix.allFinite() || !eq_rhs.allFinite() ||
      !ineq_matrix.allFinite())
    throw std::invalid_argument("QpProblem: non-finite data");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

QpSolver::QpSolver(QpSettings settings) : settings_(settings) {}

SolveReport QpSolver::solve(const QpProblem& problem, const std::optional<QpWarmStart>& warm) {
  problem.validate();
  const int n = problem.num_vars();
  const StackedProblem s = stack(problem);
  const int m = static_cast<int>(s.l.size());
  const double tol = settings_.tol;

  SolveReport report;
  report.eq_multipliers = VectorXd::Zero(problem.num_eq());
  report.ineq_multipliers = VectorXd::Zero(problem.num_ineq());

  if (m == 0) {
    Eigen::LDLT<MatrixXd> ldlt(problem.hessian);
    report.solution = ldlt.solve(-problem.linear);
    for (int it = 0; it < 2; ++it)
      report.solution += ldlt.solve(-problem.linear - problem.hessian * report.solution);
    report.dual_residual = inf_norm(problem.hessian * report.solution + problem.linear);
    report.status = (report.solution.allFinite() && report.dual_residual <= tol * std::max(1.0, inf_norm(problem.linear)))
                        ? SolveStatus::Optimal
                        : SolveStatus::Infeasible;
    return report;
  }

  VectorXd x = VectorXd::Zero(n);
  VectorXd y = VectorXd::Zero(m);
  if (warm) {
    if (warm->x.size() == n) x = warm->x;
    if (warm->eq_multipliers.size() == problem.num_eq()) y.head(problem.num_eq()) = warm->eq_multipliers;
    if (warm->ineq_multipliers.size() == problem.num_ineq()) y.tail(problem.num_ineq()) = warm->ineq_multipliers;
  }
  VectorXd z = clip(s.a * x, s.l, s.u);

  double rho = settings_.rho;
  VectorXd rho_vec = row_penalties(s, rho);
  const double sigma = settings_.sigma;
  const double alpha = settings_.alpha;

  auto factor = [&]() {
    MatrixXd k = problem.hessian;
    k.diagonal().array() += sigma;
    k.noalias() += s.a.transpose() * rho_vec.asDiagonal() * s.a;
    return Eigen::LLT<MatrixXd>(k);
  };
  Eigen::LLT<MatrixXd> llt = factor();

  bool converged = false;
  bool infeasible = false;
  int iter = 0;
  Residuals res;
  for (iter = 1; iter <= settings_.max_iter; ++iter) {
    const VectorXd rhs = sigma * x - problem.linear + s.a.transpose() * (rho_vec.cwiseProduct(z) - y);
    const VectorXd x_tilde = llt.solve(rhs);
    const VectorXd z_tilde = s.a * x_tilde;
    const VectorXd x_next = alpha * x_tilde + (1.0 - alpha) * x;
    const VectorXd z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
    const VectorXd z_next = clip(z_relaxed + y.cwiseQuotient(rho_vec), s.l, s.u);
    const VectorXd y_next = y + rho_vec.cwiseProduct(z_relaxed - z_next);
    const VectorXd dy = y_next - y;
    x = x_next;
    z = z_next;
    y = y_next;

    res = residuals(problem, s, x, z, y);
    const double eps_p = tol + tol * res.primal_scale;
    const double eps_d = tol + tol * res.dual_scale;
    if (res.primal <= eps_p && res.dual <= eps_d) {
      converged = true;
      break;
    }
    if (primal_infeasible(s, dy, settings_.infeasibility_tol)) {
      infeasible = true;
      break;
    }
    if (settings_.adapt_interval > 0 && iter % settings_.adapt_interval == 0) {
      const double pn = res.primal / (res.primal_scale + 1e-30);
      const double dn = res.dual / (res.dual_scale + 1e-30);
      const double ratio = std::sqrt(pn / (dn + 1e-30));
      const double new_rho = std::clamp(rho * ratio, kRhoMin, kRhoMax);
      if (new_rho > 5.0 * rho || new_rho < 0.2 * rho) {
        rho = new_rho;
        rho_vec = row_penalties(s, rho);
        llt = factor();
      }
    }
  }
  report.iterations = std::min(iter, settings_.max_iter);

  if (infeasible) {
    report.status = SolveStatus::Infeasible;
    report.solution = x;
    report.primal_residual = res.primal;
    report.dual_residual = res.dual;
    return report;
  }

  report.solution = x;
  report.primal_residual = constraint_violation(s, x);
  report.dual_residual = res.dual;
  report.status = converged ? SolveStatus::Optimal : SolveStatus::MaxIter;

  if (settings_.polish) {
    const PolishResult pol = polish(problem, s, z, y, std::max(tol, 1e-9));
    if (pol.ok) {
      const double prim = constraint_violation(s, pol.x);
      const double dual = inf_norm(problem.hessian * pol.x + problem.linear + s.a.transpose() * pol.y);
      const double dual_tol = tol + tol * res.dual_scale;
      if (prim <= tol && dual <= dual_tol && dual <= std::max(report.dual_residual, tol)) {
        x = pol.x;
        y = pol.y;
        report.solution = x;
        report.primal_residual = prim;
        report.dual_residual = dual;
        report.polished = true;
        report.status = SolveStatus::Optimal;
      }
    }
  }

  report.eq_multipliers = y.head(problem.num_eq());
  report.ineq_multipliers = y.tail(problem.num_ineq());
  return report;
}

SolveReport solve_qp(const QpProblem& problem, double tol, int max_iter) {
  QpSettings settings;
  settings.tol = tol;
  settings.max_iter = max_iter;
  return QpSolver(settings).solve(problem);
}

}  // namespace locoman
