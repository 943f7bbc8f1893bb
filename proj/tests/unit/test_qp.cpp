#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "locoman/qp.hpp"
#include "oracles.hpp"

using namespace locoman;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// KKT residuals recomputed from the returned primal/dual pair.
struct Kkt {
  double stationarity;
  double feasibility;
  double complementarity;
};

Kkt recompute_kkt(const QpProblem& p, const SolveReport& r) {
  const VectorXd& x = r.solution;
  VectorXd grad = p.hessian * x + p.linear;
  if (p.num_eq()) grad += p.eq_matrix.transpose() * r.eq_multipliers;
  if (p.num_ineq()) grad += p.ineq_matrix.transpose() * r.ineq_multipliers;
  Kkt k{grad.lpNorm<Eigen::Infinity>(), 0.0, 0.0};
  if (p.num_eq()) k.feasibility = (p.eq_matrix * x - p.eq_rhs).lpNorm<Eigen::Infinity>();
  if (p.num_ineq()) {
    const VectorXd cx = p.ineq_matrix * x;
    for (int i = 0; i < p.num_ineq(); ++i) {
      k.feasibility = std::max({k.feasibility, p.ineq_lower(i) - cx(i), cx(i) - p.ineq_upper(i)});
      const double y = r.ineq_multipliers(i);
      if (y > 0) k.complementarity = std::max(k.complementarity, y * std::abs(p.ineq_upper(i) - cx(i)));
      if (y < 0) k.complementarity = std::max(k.complementarity, -y * std::abs(cx(i) - p.ineq_lower(i)));
    }
  }
  return k;
}

QpProblem one_dim(double h, double g) {
  return QpProblem::unconstrained(MatrixXd::Constant(1, 1, h), VectorXd::Constant(1, g));
}

}  // namespace

TEST_CASE("single active bound") {
  // min (x-1)^2 s.t. x <= 0.5
  QpProblem p = one_dim(2.0, -2.0);
  p.ineq_matrix = MatrixXd::Ones(1, 1);
  p.ineq_lower = VectorXd::Constant(1, -kInf);
  p.ineq_upper = VectorXd::Constant(1, 0.5);
  const SolveReport r = solve_qp(p);
  REQUIRE(r.ok());
  CHECK(r.solution(0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.ineq_multipliers(0) > 0.0);
}

TEST_CASE("symmetric projection onto an equality") {
  QpProblem p = QpProblem::unconstrained(MatrixXd::Identity(2, 2) * 2.0, VectorXd::Zero(2));
  p.eq_matrix = MatrixXd::Ones(1, 2);
  p.eq_rhs = VectorXd::Constant(1, 2.0);
  const SolveReport r = solve_qp(p);
  REQUIRE(r.ok());
  CHECK(r.solution(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.solution(1) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("random strictly convex QPs match active-set enumeration") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> nd(2, 10);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = nd(rng);
    const int me = std::uniform_int_distribution<int>(0, std::min(2, n - 1))(rng);
    const int mi = std::uniform_int_distribution<int>(1, 10)(rng);
    const QpProblem p = oracle::random_strictly_convex_qp(rng, n, me, mi);
    const auto ref = oracle::active_set_enumeration(p);
    REQUIRE(ref.has_value());
    const SolveReport r = solve_qp(p);
    REQUIRE(r.ok());
    CHECK(std::abs(p.objective(r.solution) - p.objective(*ref)) <= 1e-6);

    const Kkt k = recompute_kkt(p, r);
    CHECK(k.stationarity <= 10 * 1e-6);
    CHECK(k.feasibility <= 1e-6);
    CHECK(k.complementarity <= 10 * 1e-6);
  }
}

TEST_CASE("two-sided rows and warm start") {
  std::mt19937 rng(99);
  QpProblem p = oracle::random_strictly_convex_qp(rng, 6, 1, 0);
  p.ineq_matrix = MatrixXd::Identity(6, 6);
  p.ineq_lower = VectorXd::Constant(6, -0.2);
  p.ineq_upper = VectorXd::Constant(6, 0.2);
  QpSolver solver;
  const SolveReport cold = solver.solve(p);
  REQUIRE(cold.ok());
  const SolveReport warm = solver.solve(p, QpWarmStart{cold.solution, cold.eq_multipliers, cold.ineq_multipliers});
  REQUIRE(warm.ok());
  CHECK(warm.iterations <= cold.iterations);
  CHECK((warm.solution - cold.solution).norm() < 1e-8);
  CHECK(recompute_kkt(p, cold).feasibility <= 1e-6);
}

TEST_CASE("unconstrained problems return the Newton point") {
  std::mt19937 rng(1);
  for (int t = 0; t < 10; ++t) {
    QpProblem p = oracle::random_strictly_convex_qp(rng, 8, 0, 0);
    const SolveReport r = solve_qp(p);
    REQUIRE(r.ok());
    const VectorXd expected = p.hessian.fullPivLu().solve(-p.linear);
    CHECK((r.solution - expected).norm() <= 1e-8 * expected.norm());
  }
}

TEST_CASE("solve is bitwise deterministic") {
  std::mt19937 rng(5);
  const QpProblem p = oracle::random_strictly_convex_qp(rng, 10, 2, 10);
  const SolveReport a = solve_qp(p);
  const SolveReport b = solve_qp(p);
  REQUIRE(a.solution.size() == b.solution.size());
  CHECK(std::memcmp(a.solution.data(), b.solution.data(), sizeof(double) * static_cast<std::size_t>(a.solution.size())) == 0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("infeasible constraints are reported") {
  QpProblem p = one_dim(1.0, 0.0);
  p.ineq_matrix.resize(2, 1);
  p.ineq_matrix << 1.0, -1.0;
  p.ineq_lower = VectorXd::Constant(2, -kInf);
  p.ineq_upper.resize(2);
  p.ineq_upper << 0.0, -1.0;  // x <= 0 and x >= 1
  const SolveReport r = solve_qp(p);
  CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("iteration budget exhaustion is flagged") {
  std::mt19937 rng(8);
  const QpProblem p = oracle::random_strictly_convex_qp(rng, 10, 2, 10);
  QpSettings s;
  s.max_iter = 2;
  s.polish = false;
  const SolveReport r = QpSolver(s).solve(p);
  CHECK(r.status == SolveStatus::MaxIter);
  CHECK(r.solution.size() == 10);
}

TEST_CASE("malformed problems are rejected") {
  QpProblem p = one_dim(1.0, 0.0);
  p.ineq_matrix = MatrixXd::Ones(1, 1);
  p.ineq_lower = VectorXd::Constant(1, 1.0);
  p.ineq_upper = VectorXd::Constant(1, 0.0);
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);
  QpProblem asym = QpProblem::unconstrained(MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  asym.hessian(0, 1) = 1.0;
  CHECK_THROWS_AS(solve_qp(asym), std::invalid_argument);
}
