#include "npcac/ident.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace npcac {

namespace {

void symmetrize(Eigen::MatrixXd& m) { m = (0.5 * (m + m.transpose())).eval(); }

}  // namespace

ForgetResult directional_forget(const Eigen::MatrixXd& R, const Eigen::MatrixXd& P, const Eigen::VectorXd& phi,
                                double lambda) {
  const Eigen::VectorXd Rphi = R * phi;
  const double info = phi.dot(Rphi);
  if (!(info > 0.0)) throw std::domain_error("forgetting direction carries no information");
  ForgetResult out;
  out.R = R - ((1.0 - lambda) / info) * Rphi * Rphi.transpose();
  out.P = P + ((1.0 - lambda) / (lambda * info)) * phi * phi.transpose();
  return out;
}

SiftRls::SiftRls(Eigen::VectorXd theta0, const Eigen::MatrixXd& R0, double lambda, double epsilon) {
  const auto n = theta0.size();
  if (R0.rows() != n || R0.cols() != n) throw std::invalid_argument("R0 must be square with theta0's length");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("forgetting factor must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("filter threshold must be positive");
  if (!theta0.allFinite() || !R0.allFinite()) throw std::invalid_argument("initial estimate must be finite");
  if (!R0.isApprox(R0.transpose(), 1e-12)) throw std::invalid_argument("R0 must be symmetric");

  Eigen::LLT<Eigen::MatrixXd> llt(R0);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("R0 must be positive definite");
  // LLT accepts some numerically singular inputs; reject a vanishing pivot explicitly
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if (diag.minCoeff() <= 1e-12 * std::sqrt(R0.diagonal().cwiseAbs().maxCoeff()))
    throw std::invalid_argument("R0 must be positive definite");

  state_.theta = std::move(theta0);
  state_.R = R0;
  state_.P = llt.solve(Eigen::MatrixXd::Identity(n, n));
  symmetrize(state_.P);
  state_.lambda = lambda;
  state_.epsilon = epsilon;
}

SiftRls SiftRls::with_scaled_identity(Eigen::VectorXd theta0, double r0, double lambda, double epsilon) {
  const auto n = theta0.size();
  return SiftRls(std::move(theta0), r0 * Eigen::MatrixXd::Identity(n, n), lambda, epsilon);
}

RlsStepResult SiftRls::step(double y, const Eigen::VectorXd& phi) {
  if (phi.size() != dim()) throw std::invalid_argument("regressor length does not match the estimate");
  if (!std::isfinite(y) || !phi.allFinite()) throw std::invalid_argument("non-finite measurement or regressor");

  RlsStepResult result;
  result.prediction_error = y - state_.theta.dot(phi);

  if (phi.norm() < std::sqrt(state_.epsilon)) {
    // filtered sample: ybar = 0, phibar = 0, so both stages are the identity
    result.filtered = true;
    return result;
  }

  if (state_.lambda < 1.0) {
    auto forgot = directional_forget(state_.R, state_.P, phi, state_.lambda);
    state_.R = std::move(forgot.R);
    state_.P = std::move(forgot.P);
  }

  state_.R.noalias() += phi * phi.transpose();
  const Eigen::VectorXd Pphi = state_.P * phi;
  state_.P -= (Pphi * Pphi.transpose()) / (1.0 + phi.dot(Pphi));
  symmetrize(state_.R);
  symmetrize(state_.P);

  const double residual = y - state_.theta.dot(phi);
  state_.theta += residual * (state_.P * phi);
  return result;
}

}  // namespace npcac
