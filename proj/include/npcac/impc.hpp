#pragma once

/**
 * @file impc.hpp
 * @brief Iterative MPC over an identified pseudo-linear model.
 *
 * Prediction grid at step k (l = horizon, n = model order):
 *
 *   outputs   index 1-n .. 0  measured y_{k+idx}
 *             index 1         anchor  yhat_{k+1} = theta_{k+1} phi_{k+1}
 *             index 2 .. l+1  predicted Y
 *   controls  index 1-n .. 0  applied u_{k+idx}
 *             index 1 .. l    decision U
 *
 * Freezing the state-dependent coefficients (SDC) along a trajectory turns the
 * horizon recursion into the linear constraint A_eq [Y; U] = b_eq. One
 * subiteration maps U to the QP optimum under the coefficients frozen along
 * the rollout of U; Broyden's method drives that map to a fixed point.
 */

#include "npcac/model.hpp"
#include "npcac/qp.hpp"

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <vector>

namespace npcac {

struct HorizonConfig {
  int horizon = 10;        // l
  int subiterations = 1;   // nu, number of QP solves per step
  double Q = 1.0;
  double R = 0.0;
  std::optional<Bounds> bounds;
  double broyden_tol = 1e-9;

  void validate() const;
};

struct HorizonState {
  double anchor = 0.0;          // yhat_{k+1}
  std::vector<double> past_y;   // past_y[i] = y_{k-i}, i = 0 .. n-1
  std::vector<double> past_u;   // past_u[i] = u_{k-i}, i = 0 .. n-1
  Eigen::VectorXd command;      // r_{k+2} .. r_{k+l+1}

  Eigen::Index horizon() const { return command.size(); }
};

/// Coefficients of one prediction row, frozen along a trajectory.
struct SdcRow {
  std::vector<double> F;  // F[i-1] = -Fhat_i(y at index - i)
  std::vector<double> G;  // G[i-1] = +Ghat_i(y at index - i)
  double H = 0.0;         // Hbar h(y at index - 1)
};

struct HorizonProblem {
  Eigen::MatrixXd Fp;    // l x l, strictly lower triangular
  Eigen::MatrixXd Gp;    // l x l, lower triangular
  Eigen::MatrixXd Fd;    // l x n, multiplies D's output entries
  Eigen::MatrixXd Gd;    // l x (n-1), multiplies D's control entries
  Eigen::VectorXd D;     // [y_{k-n+2} .. y_k, yhat_{k+1}, u_{k-n+2} .. u_k]
  Eigen::VectorXd Hbar;  // l
  QpProblem qp;          // A_eq = [I - Fp, -Gp], b_eq = [Fd Gd] D + Hbar
};

class DivergedRollout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// yhat_{k+1} from theta_{k+1}; hist must already hold (y_k, u_k).
double anchor_prediction(const ModelStructure& structure, const CoefficientVector& theta, const History& hist,
                         long k);

/// Nonlinear forward recursion of the model over the horizon.
/// Throws DivergedRollout on a non-finite prediction.
Eigen::VectorXd rollout(const ModelStructure& structure, const CoefficientVector& theta, const HorizonState& state,
                        const Eigen::VectorXd& U);

/// SDC rows for prediction indices 2 .. l+1, evaluated on the trajectory Y.
std::vector<SdcRow> build_sdc(const ModelStructure& structure, const CoefficientVector& theta,
                              const HorizonState& state, const Eigen::VectorXd& Y);

/// The same recursion as rollout, with coefficients held fixed.
Eigen::VectorXd linear_rollout(const std::vector<SdcRow>& sdc, const HorizonState& state, const Eigen::VectorXd& U);

HorizonProblem assemble(const std::vector<SdcRow>& sdc, const HorizonState& state, const HorizonConfig& config);

struct FixedPointEval {
  Eigen::VectorXd U;  // optimal controls under the frozen SDC
  Eigen::VectorXd Y;  // matching optimal outputs
  QpDiagnostics qp;
};

/// One subiteration map: U -> argmin of the QP with SDC frozen along rollout(U).
FixedPointEval fixed_point_map(const ModelStructure& structure, const CoefficientVector& theta,
                               const HorizonState& state, const HorizonConfig& config, const Eigen::VectorXd& U);

struct SubiterationDiagnostics {
  int evaluations = 0;              // calls of the fixed-point map (QP solves)
  int qp_iterations = 0;
  bool ridge_applied = false;
  bool diverged = false;            // some rollout went non-finite
  bool converged = false;           // residual reached broyden_tol
  double residual = 0.0;            // ||Phi(U) - U||_inf at the accepted iterate
  std::vector<double> accepted_residuals;  // 2-norms, one per accepted iterate
};

struct SubiterationResult {
  Eigen::VectorXd U;  // Phi at the accepted iterate
  Eigen::VectorXd Y;
  SubiterationDiagnostics diagnostics;
};

SubiterationResult subiterate(const ModelStructure& structure, const CoefficientVector& theta,
                              const HorizonState& state, const HorizonConfig& config, const Eigen::VectorXd& U0);

struct ControlDecision {
  double u = 0.0;
  Eigen::VectorXd U;
  SubiterationDiagnostics diagnostics;
};

/// Receding-horizon controller; keeps the previous optimal sequence for the
/// warm start.
class ImpcController {
 public:
  ImpcController(ModelStructure structure, HorizonConfig config);

  /// u_{k+1} from theta_{k+1} and the horizon data at step k.
  ControlDecision compute_control(const CoefficientVector& theta, const HorizonState& state);

  const HorizonConfig& config() const { return config_; }
  const ModelStructure& structure() const { return structure_; }

 private:
  ModelStructure structure_;
  HorizonConfig config_;
  std::optional<Eigen::VectorXd> previous_;
};

}  // namespace npcac
