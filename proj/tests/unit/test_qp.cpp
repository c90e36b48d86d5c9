#include "npcac/qp.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <limits>

using namespace npcac;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

QpProblem random_problem(std::mt19937_64& rng, int l) {
  MatrixXd Fp = MatrixXd::Zero(l, l), Gp = MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j <= i; ++j) {
      if (j < i) Fp(i, j) = oracle::normal(rng, 1, 0.5)[0];
      Gp(i, j) = oracle::normal(rng, 1)[0];
    }
  QpProblem p;
  p.A_eq.resize(l, 2 * l);
  p.A_eq << MatrixXd::Identity(l, l) - Fp, -Gp;
  p.b_eq = oracle::normal(rng, l);
  p.H = oracle::spd(rng, 2 * l, 0.1);
  p.F = oracle::normal(rng, 2 * l);
  return p;
}

// Outputs implied by the controls through the equality constraint.
VectorXd complete(const QpProblem& p, const VectorXd& U) {
  const Eigen::Index l = p.horizon();
  const MatrixXd M = p.A_eq.leftCols(l);
  const VectorXd Y = M.triangularView<Eigen::Lower>().solve(p.b_eq - p.A_eq.rightCols(l) * U);
  VectorXd z(2 * l);
  z << Y, U;
  return z;
}

// Exhaustive search over which controls sit at a bound.
VectorXd box_oracle(const QpProblem& p) {
  const Eigen::Index l = p.horizon();
  const double lo = p.bounds->lower, hi = p.bounds->upper;
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_z;
  int combos = 1;
  for (Eigen::Index i = 0; i < l; ++i) combos *= 3;
  for (int c = 0; c < combos; ++c) {
    std::vector<int> state(static_cast<std::size_t>(l));
    int code = c, fixed = 0;
    for (auto& s : state) {
      s = code % 3;
      code /= 3;
      fixed += s != 0;
    }
    MatrixXd A(l + fixed, 2 * l);
    VectorXd b(l + fixed);
    A.topRows(l) = p.A_eq;
    b.head(l) = p.b_eq;
    int row = static_cast<int>(l);
    for (Eigen::Index i = 0; i < l; ++i) {
      if (state[static_cast<std::size_t>(i)] == 0) continue;
      A.row(row).setZero();
      A(row, l + i) = 1.0;
      b[row++] = state[static_cast<std::size_t>(i)] == 1 ? lo : hi;
    }
    const VectorXd z = oracle::kkt(p.H, p.F, A, b);
    if (z.tail(l).maxCoeff() > hi + 1e-12 || z.tail(l).minCoeff() < lo - 1e-12) continue;
    const double obj = p.objective(z);
    if (obj < best) {
      best = obj;
      best_z = z;
    }
  }
  return best_z;
}

}  // namespace

TEST_SUITE("qp") {

TEST_CASE("origin is optimal for the trivial instance") {
  const int l = 3;
  QpProblem p;
  p.H = MatrixXd::Identity(2 * l, 2 * l);
  p.F = VectorXd::Zero(2 * l);
  p.A_eq.resize(l, 2 * l);
  p.A_eq << MatrixXd::Identity(l, l), -MatrixXd::Identity(l, l);
  p.b_eq = VectorXd::Zero(l);
  const QpSolution s = solve_qp(p);
  CHECK(s.z.norm() == 0.0);
  CHECK_FALSE(s.diagnostics.ridge_applied);
}

TEST_CASE("unbounded solve matches the full KKT system") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 500; ++t) {
    const QpProblem p = random_problem(rng, 1 + t % 8);
    const VectorXd z = solve_qp(p).z, want = oracle::kkt(p.H, p.F, p.A_eq, p.b_eq);
    CHECK((z - want).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, want.cwiseAbs().maxCoeff()));
    CHECK((p.A_eq * z - p.b_eq).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("reduced gradient vanishes at the unbounded optimum") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const QpProblem p = random_problem(rng, 1 + t % 8);
    const Eigen::Index l = p.horizon();
    const VectorXd z = solve_qp(p).z;
    // columns of E span the null space of A_eq: dz = [M^{-1} Gp; I] dU
    const MatrixXd M = p.A_eq.leftCols(l);
    MatrixXd E(2 * l, l);
    E.topRows(l) = M.triangularView<Eigen::Lower>().solve(-p.A_eq.rightCols(l));
    E.bottomRows(l) = MatrixXd::Identity(l, l);
    CHECK((E.transpose() * (2.0 * p.H * z + p.F)).norm() < 1e-8);
  }
}

TEST_CASE("wide bounds leave the answer unchanged") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    QpProblem p = random_problem(rng, 1 + t % 8);
    const VectorXd free = solve_qp(p).z;
    p.bounds = Bounds{-1e6, 1e6};
    CHECK((solve_qp(p).z - free).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("box-constrained solve matches exhaustive search") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 300; ++t) {
    const int l = 1 + t % 4;
    QpProblem p = random_problem(rng, l);
    p.bounds = Bounds{-0.2, 0.3};
    const QpSolution s = solve_qp(p);
    const VectorXd want = box_oracle(p);
    CHECK((s.z - want).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((p.A_eq * s.z - p.b_eq).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s.z.tail(l).maxCoeff() <= 0.3);
    CHECK(s.z.tail(l).minCoeff() >= -0.2);
    CHECK(s.diagnostics.iterations <= 10 * (2 * l + 1));
  }
}

TEST_CASE("optimum beats random feasible points") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  for (int t = 0; t < 50; ++t) {
    const int l = 1 + t % 8;
    QpProblem p = random_problem(rng, l);
    if (t % 2) p.bounds = Bounds{-0.5, 0.5};
    const double best = solve_qp(p).diagnostics.objective;
    for (int j = 0; j < 100; ++j) {
      VectorXd U(l);
      for (auto& u : U) u = box(rng);
      CHECK(best <= p.objective(complete(p, U)) + 1e-12);
    }
  }
}

TEST_CASE("zero control weight falls back to the ridge when needed") {
  const int l = 2;
  QpProblem p;
  p.H = MatrixXd::Zero(2 * l, 2 * l);
  p.F = VectorXd::Zero(2 * l);
  p.A_eq.resize(l, 2 * l);
  p.A_eq << MatrixXd::Identity(l, l), -MatrixXd::Identity(l, l);
  p.b_eq = VectorXd::Zero(l);
  const QpSolution s = solve_qp(p);
  CHECK(s.diagnostics.ridge_applied);
  CHECK(s.z.norm() < 1e-12);
}

TEST_CASE("iteration cap raises instead of returning a partial answer") {
  std::mt19937_64 rng(16);
  int raised = 0;
  for (int t = 0; t < 50; ++t) {
    QpProblem p = random_problem(rng, 6);
    p.bounds = Bounds{-0.05, 0.05};
    const QpSolution full = solve_qp(p);
    if (full.diagnostics.iterations < 2) continue;
    QpOptions capped;
    capped.max_iterations = full.diagnostics.iterations - 1;
    CHECK_THROWS_AS(solve_qp(p, capped), std::runtime_error);
    ++raised;
  }
  CHECK(raised > 0);
}

TEST_CASE("initial guess does not change the optimum") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    QpProblem p = random_problem(rng, 1 + t % 8);
    p.bounds = Bounds{-0.3, 0.3};
    const VectorXd cold = solve_qp(p).z;
    p.initial_guess = oracle::normal(rng, 2 * p.horizon());
    CHECK((solve_qp(p).z - cold).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("malformed problems are rejected") {
  std::mt19937_64 rng(15);
  QpProblem p = random_problem(rng, 3);
  QpProblem upper = p;
  upper.A_eq(0, 1) = 0.5;
  CHECK_THROWS_AS(solve_qp(upper), std::invalid_argument);
  QpProblem diag = p;
  diag.A_eq(1, 1) = 2.0;
  CHECK_THROWS_AS(solve_qp(diag), std::invalid_argument);
  QpProblem infeasible = p;
  infeasible.bounds = Bounds{1.0, -1.0};
  CHECK_THROWS_AS(solve_qp(infeasible), std::invalid_argument);
  QpProblem short_f = p;
  short_f.F = VectorXd::Zero(2);
  CHECK_THROWS_AS(solve_qp(short_f), std::invalid_argument);
}

}
