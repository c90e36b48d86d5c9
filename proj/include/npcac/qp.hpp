#pragma once

/**
 * @file qp.hpp
 * @brief Dense QP for the horizon subproblem.
 *
 *   minimize    z' H z + F' z
 *   subject to  A_eq z = b_eq,   u_min <= z_U <= u_max
 *
 * with z = [Y; U] (each of length l). The output block of A_eq must be unit
 * lower triangular, so Y is eliminated by forward substitution and the
 * remaining problem in U is solved densely, with a primal active-set loop
 * when box bounds are given.
 */

#include <Eigen/Core>

#include <optional>

namespace npcac {

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct QpProblem {
  Eigen::MatrixXd H;     // 2l x 2l, symmetric PSD
  Eigen::VectorXd F;     // 2l
  Eigen::MatrixXd A_eq;  // l x 2l
  Eigen::VectorXd b_eq;  // l
  std::optional<Bounds> bounds;
  Eigen::VectorXd initial_guess;  // 2l, optional (empty = zeros)

  Eigen::Index horizon() const { return A_eq.rows(); }
  double objective(const Eigen::VectorXd& z) const { return z.dot(H * z) + F.dot(z); }
};

struct QpDiagnostics {
  int iterations = 0;          // equality-constrained subproblem solves
  bool ridge_applied = false;  // reduced Hessian needed the 1e-10 ridge
  int active_bounds = 0;
  double objective = 0.0;
};

struct QpSolution {
  Eigen::VectorXd z;
  QpDiagnostics diagnostics;
};

struct QpOptions {
  double ridge = 1e-10;
  int max_iterations = 0;  // 0 = 10 * (2l + 1)
};

/// Throws std::invalid_argument on malformed input or u_min > u_max, and
/// std::runtime_error if the reduced Hessian stays singular after the ridge or
/// the active-set loop does not terminate.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace npcac
