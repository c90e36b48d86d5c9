#pragma once

/**
 * @file model.hpp
 * @brief Pseudo-linear input-output model: structure, coefficients, regressor.
 *
 * The one-step model is
 *
 *   y_k = sum_i [ -Fbar_i f_i(y_{k-i}) y_{k-i} + Gbar_i g_i(y_{k-i}) u_{k-i} ] + Hbar h(y_{k-1})
 *       = theta . phi_k
 *
 * with theta = [Fbar_1 .. Fbar_n, Gbar_1 .. Gbar_n, Hbar]. Each scalar basis
 * is evaluated at the leading entry of its output window.
 */

#include "npcac/basis.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace npcac {

struct ModelStructure {
  int order = 1;
  std::vector<BasisSpec> f_specs;  // one per lag
  std::vector<BasisSpec> g_specs;  // one per lag
  std::optional<BasisSpec> h_spec;

  /// Same dictionaries for every lag.
  static ModelStructure uniform(int order, const BasisSpec& f, const BasisSpec& g,
                                std::optional<BasisSpec> h = std::nullopt);

  /// Throws std::invalid_argument if lag counts or dimensions disagree.
  void validate() const;

  int f_dim() const { return output_dim(f_specs.front()); }
  int g_dim() const { return output_dim(g_specs.front()); }
  int h_dim() const { return h_spec ? output_dim(*h_spec) : 0; }
  int phi_dim() const { return order * (f_dim() + g_dim()) + h_dim(); }
};

/// theta, partitioned as [F_1 .. F_n, G_1 .. G_n, H]. Lags are 1-based.
class CoefficientVector {
 public:
  CoefficientVector() = default;
  CoefficientVector(const ModelStructure& structure, Eigen::VectorXd values);

  static CoefficientVector zeros(const ModelStructure& structure);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  Eigen::Index size() const { return values_.size(); }

  Eigen::VectorBlock<const Eigen::VectorXd> F(int lag) const;
  Eigen::VectorBlock<const Eigen::VectorXd> G(int lag) const;
  Eigen::VectorBlock<const Eigen::VectorXd> H() const;

  /// Rebuilds theta from its slices (inverse of the accessors above).
  static CoefficientVector concat(const ModelStructure& structure, const std::vector<Eigen::VectorXd>& f,
                                  const std::vector<Eigen::VectorXd>& g, const Eigen::VectorXd& h);

 private:
  int order_ = 0;
  int f_dim_ = 0;
  int g_dim_ = 0;
  int h_dim_ = 0;
  Eigen::VectorXd values_;
};

/**
 * Fixed-depth ring buffer of (y_k, u_k) pairs addressed by absolute step.
 * Steps before the first recorded one read as zero.
 */
class History {
 public:
  explicit History(int depth, long first_step = 0);

  /// Records (y_k, u_k) for the next step.
  void push(double y, double u);
  /// Overwrites the output of the latest step.
  void set_latest_y(double y);

  double y(long step) const;
  double u(long step) const;

  long latest() const { return latest_; }
  int depth() const { return depth_; }
  bool covers(long oldest_step) const;

 private:
  int depth_;
  long first_;
  long latest_;
  std::vector<double> ys_;
  std::vector<double> us_;
};

/// Lagged data: y_lags[i-1] = y_{k-i}, u_lags[i-1] = u_{k-i}, i = 1..order.
Eigen::VectorXd regressor(const ModelStructure& structure, std::span<const double> y_lags,
                          std::span<const double> u_lags);

/// phi_k from the history; needs y, u at steps k-1 .. k-order.
Eigen::VectorXd regressor(const ModelStructure& structure, const History& hist, long k);

double predict(const CoefficientVector& theta, const Eigen::VectorXd& phi);

double prediction_error(const CoefficientVector& theta, const Eigen::VectorXd& phi, double y);

/// Fhat_i = Fbar_i . f_i(window_lead)
double eval_Fhat(const ModelStructure& structure, const CoefficientVector& theta, int lag, double window_lead);
/// Ghat_i = Gbar_i . g_i(window_lead)
double eval_Ghat(const ModelStructure& structure, const CoefficientVector& theta, int lag, double window_lead);
/// Hbar . h(window_lead); zero when h is absent.
double eval_Hterm(const ModelStructure& structure, const CoefficientVector& theta, double window_lead);

}  // namespace npcac
