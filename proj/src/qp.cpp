#include "npcac/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace npcac {

namespace {

enum class Bound { Free, Lower, Upper };

void check_shapes(const QpProblem& p) {
  const auto l = p.A_eq.rows();
  if (l < 1) throw std::invalid_argument("QP horizon must be >= 1");
  if (p.A_eq.cols() != 2 * l) throw std::invalid_argument("A_eq must be l x 2l");
  if (p.H.rows() != 2 * l || p.H.cols() != 2 * l) throw std::invalid_argument("H must be 2l x 2l");
  if (p.F.size() != 2 * l) throw std::invalid_argument("F must have length 2l");
  if (p.b_eq.size() != l) throw std::invalid_argument("b_eq must have length l");
  if (p.initial_guess.size() != 0 && p.initial_guess.size() != 2 * l)
    throw std::invalid_argument("initial guess must have length 2l");
  if (!p.H.allFinite() || !p.F.allFinite() || !p.A_eq.allFinite() || !p.b_eq.allFinite())
    throw std::invalid_argument("QP data must be finite");

  const auto M = p.A_eq.leftCols(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    if (M(i, i) != 1.0) throw std::invalid_argument("output block of A_eq must have a unit diagonal");
    for (Eigen::Index j = i + 1; j < l; ++j)
      if (M(i, j) != 0.0) throw std::invalid_argument("output block of A_eq must be lower triangular");
  }
  if (p.bounds) {
    if (!(p.bounds->lower <= p.bounds->upper)) throw std::invalid_argument("infeasible bounds: u_min > u_max");
  }
}

// Solves Hr[free, free] x_free = rhs_free. Returns false if not PD.
bool solve_free(const Eigen::MatrixXd& Hr, const std::vector<int>& free, const Eigen::VectorXd& rhs,
                Eigen::VectorXd& out) {
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd sub(m, m);
  Eigen::VectorXd r(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    r[a] = rhs[free[a]];
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = Hr(free[a], free[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) return false;
  out = llt.solve(r);
  return out.allFinite();
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  check_shapes(problem);
  const auto l = problem.horizon();

  // Y = c + T U  from  M Y - N U = b
  const auto M = problem.A_eq.leftCols(l).triangularView<Eigen::UnitLower>();
  const Eigen::MatrixXd N = -problem.A_eq.rightCols(l);
  const Eigen::VectorXd c = M.solve(problem.b_eq);
  const Eigen::MatrixXd T = M.solve(N);

  // z = z0 + E U
  Eigen::MatrixXd E(2 * l, l);
  E << T, Eigen::MatrixXd::Identity(l, l);
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(2 * l);
  z0.head(l) = c;

  const Eigen::MatrixXd HE = problem.H * E;
  Eigen::MatrixXd Hr = E.transpose() * HE;
  Hr = (0.5 * (Hr + Hr.transpose())).eval();
  const Eigen::VectorXd gr = HE.transpose() * z0 + 0.5 * E.transpose() * problem.F;

  QpDiagnostics diag;
  {
    Eigen::LLT<Eigen::MatrixXd> llt(Hr);
    if (llt.info() != Eigen::Success) {
      Hr.diagonal().array() += options.ridge;
      diag.ridge_applied = true;
      Eigen::LLT<Eigen::MatrixXd> retry(Hr);
      if (retry.info() != Eigen::Success) throw std::runtime_error("reduced QP Hessian is singular");
    }
  }

  Eigen::VectorXd U(l);
  std::vector<Bound> state(static_cast<std::size_t>(l), Bound::Free);
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : 10 * static_cast<int>(2 * l + 1);

  if (!problem.bounds) {
    std::vector<int> all(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) all[i] = i;
    if (!solve_free(Hr, all, -gr, U)) throw std::runtime_error("reduced QP Hessian is singular");
    diag.iterations = 1;
  } else {
    const double lo = problem.bounds->lower;
    const double hi = problem.bounds->upper;
    // start from the better of the clamped unconstrained optimum and the
    // clamped initial guess
    std::vector<int> all(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) all[i] = i;
    Eigen::VectorXd unconstrained;
    if (!solve_free(Hr, all, -gr, unconstrained)) throw std::runtime_error("reduced QP Hessian is singular");
    auto reduced_objective = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(Hr * v) + gr.dot(v); };
    U = unconstrained.cwiseMax(lo).cwiseMin(hi);
    if (problem.initial_guess.size() == 2 * l && problem.initial_guess.allFinite()) {
      const Eigen::VectorXd guess = problem.initial_guess.tail(l).cwiseMax(lo).cwiseMin(hi);
      if (reduced_objective(guess) < reduced_objective(U)) U = guess;
    }
    for (Eigen::Index i = 0; i < l; ++i) {
      if (U[i] == lo) state[i] = Bound::Lower;
      else if (U[i] == hi) state[i] = Bound::Upper;
    }

    const double scale = 1.0 + std::max(std::abs(lo), std::abs(hi));
    bool done = false;
    while (!done) {
      if (++diag.iterations > max_iter)
        throw std::runtime_error("active-set loop did not terminate in " + std::to_string(max_iter) + " iterations");

      std::vector<int> free;
      for (int i = 0; i < l; ++i)
        if (state[i] == Bound::Free) free.push_back(i);

      // minimizer over the free components with the working set held fixed
      Eigen::VectorXd target = U;
      if (!free.empty()) {
        Eigen::VectorXd fixed = U;
        for (int i : free) fixed[i] = 0.0;
        const Eigen::VectorXd rhs = -(gr + Hr * fixed);
        Eigen::VectorXd xf;
        if (!solve_free(Hr, free, rhs, xf)) throw std::runtime_error("reduced QP Hessian is singular on the free set");
        for (std::size_t a = 0; a < free.size(); ++a) target[free[a]] = xf[static_cast<Eigen::Index>(a)];
      }
      const Eigen::VectorXd step = target - U;

      if (step.lpNorm<Eigen::Infinity>() <= 1e-13 * scale) {
        const Eigen::VectorXd grad = Hr * U + gr;
        int release = -1;
        double worst = -1e-12 * (1.0 + grad.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < l; ++i) {
          double mu = 0.0;
          if (state[i] == Bound::Lower) mu = grad[i];
          else if (state[i] == Bound::Upper) mu = -grad[i];
          else continue;
          if (mu < worst) {
            worst = mu;
            release = i;
          }
        }
        if (release < 0) done = true;
        else state[release] = Bound::Free;
        continue;
      }

      double alpha = 1.0;
      int blocking = -1;
      Bound blocking_side = Bound::Free;
      for (int i : free) {
        double ratio = 1.0;
        Bound side = Bound::Free;
        if (step[i] < 0.0 && target[i] < lo) {
          ratio = (lo - U[i]) / step[i];
          side = Bound::Lower;
        } else if (step[i] > 0.0 && target[i] > hi) {
          ratio = (hi - U[i]) / step[i];
          side = Bound::Upper;
        } else {
          continue;
        }
        if (ratio < alpha) {
          alpha = ratio;
          blocking = i;
          blocking_side = side;
        }
      }
      if (blocking < 0) {
        U = target;
      } else {
        U += std::max(alpha, 0.0) * step;
        U[blocking] = blocking_side == Bound::Lower ? lo : hi;
        state[blocking] = blocking_side;
      }
    }

    for (Eigen::Index i = 0; i < l; ++i) {
      if (state[i] == Bound::Lower) U[i] = lo;
      if (state[i] == Bound::Upper) U[i] = hi;
      U[i] = std::clamp(U[i], lo, hi);
      if (state[i] != Bound::Free) ++diag.active_bounds;
    }
  }

  QpSolution sol;
  sol.z.resize(2 * l);
  sol.z.head(l) = c + T * U;
  sol.z.tail(l) = U;
  diag.objective = problem.objective(sol.z);
  sol.diagnostics = diag;
  return sol;
}

}  // namespace npcac
