#pragma once

/**
 * @file ident.hpp
 * @brief Recursive least squares with subspace-of-information forgetting.
 *
 * Each step filters out regressors with norm below sqrt(eps), discounts the
 * information matrix R only along the current regressor direction, then
 * applies the rank-one least-squares update. P = R^{-1} is propagated
 * alongside R by the matching rank-one formulas.
 */

#include <Eigen/Core>

namespace npcac {

struct RlsState {
  Eigen::VectorXd theta;
  Eigen::MatrixXd R;  // information
  Eigen::MatrixXd P;  // covariance, R^{-1}
  double lambda = 1.0;
  double epsilon = 1e-4;
};

/// Information and covariance after the directional forgetting stage.
struct ForgetResult {
  Eigen::MatrixXd R;
  Eigen::MatrixXd P;
};

/// Forgetting along phi. phi must be nonzero.
ForgetResult directional_forget(const Eigen::MatrixXd& R, const Eigen::MatrixXd& P, const Eigen::VectorXd& phi,
                                double lambda);

struct RlsStepResult {
  double prediction_error = 0.0;  // y - theta_k . phi (pre-update theta, unfiltered phi)
  bool filtered = false;          // regressor fell below the filter threshold
};

class SiftRls {
 public:
  /// Throws std::invalid_argument if R0 is not symmetric positive definite,
  /// lambda is outside (0, 1], or epsilon <= 0.
  SiftRls(Eigen::VectorXd theta0, const Eigen::MatrixXd& R0, double lambda, double epsilon);

  /// R0 = r0 * I.
  static SiftRls with_scaled_identity(Eigen::VectorXd theta0, double r0, double lambda, double epsilon);

  RlsStepResult step(double y, const Eigen::VectorXd& phi);

  const RlsState& state() const { return state_; }
  const Eigen::VectorXd& theta() const { return state_.theta; }
  Eigen::Index dim() const { return state_.theta.size(); }

 private:
  RlsState state_;
};

}  // namespace npcac
