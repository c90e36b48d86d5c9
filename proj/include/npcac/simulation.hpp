#pragma once

/**
 * @file simulation.hpp
 * @brief Closed-loop driver: plant, online identification and IMPC.
 *
 * Timing at step k: y_k is measured while u_k (computed at step k-1) is
 * applied. The estimator consumes (y_k, phi_k) to produce theta_{k+1}, which
 * anchors the horizon, and IMPC returns u_{k+1}. For 1 <= k < order the next
 * input is drawn from N(0, sigma_u^2) instead; u_1 = u_0.
 */

#include "npcac/ident.hpp"
#include "npcac/impc.hpp"
#include "npcac/model.hpp"
#include "npcac/plant.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace npcac {

struct RlsConfig {
  Eigen::VectorXd theta0;
  std::optional<double> r0_scale;  // R0 = r0_scale * I when set
  Eigen::MatrixXd r0_matrix;       // used otherwise
  double lambda = 1.0;
  double epsilon = 1e-4;

  Eigen::MatrixXd R0() const;
};

struct SimConfig {
  std::string name;
  long steps = 500;
  double y0 = 0.1;
  double u0 = 0.0;
  double sigma_u = 0.01;
  std::uint64_t seed = 0;
  double u_a = 0.1;  // carried as metadata only

  ModelStructure model;
  RlsConfig rls;
  HorizonConfig mpc;
  CommandSpec command;
  PlantSpec plant;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Zero-mean Gaussian draws from a seeded 64-bit Mersenne Twister. Uniforms
/// take the top 53 bits of each draw and normals use Box-Muller, so the
/// stream is identical on every platform.
class WarmupNoise {
 public:
  explicit WarmupNoise(std::uint64_t seed) : engine_(seed) {}
  double normal(double stddev);

 private:
  double uniform();
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct StepRecord {
  long k = 0;
  double y = 0.0;
  double u = 0.0;
  double r = 0.0;
  double e_c = 0.0;
  double e_p = 0.0;
  Eigen::VectorXd theta;  // estimate used to predict y_k
  int subiterations = 0;
  double residual = 0.0;
  bool ridge = false;
  bool diverged = false;
  int qp_iterations = 0;
  double wall_seconds = 0.0;
};

struct RunLog {
  std::vector<StepRecord> records;  // k = 1 .. N
  std::string error;                // non-empty if the run aborted

  bool ok() const { return error.empty(); }
};

class ClosedLoop {
 public:
  explicit ClosedLoop(SimConfig cfg);

  /// Runs one step; a given override replaces the plant output.
  const StepRecord& advance(std::optional<double> output_override = std::nullopt);

  long step() const { return k_; }
  /// Input that will be applied at the next step.
  double pending_control() const { return next_u_; }
  const CoefficientVector& estimate() const { return theta_; }
  const RunLog& log() const { return log_; }
  const SimConfig& config() const { return cfg_; }

 private:
  SimConfig cfg_;
  History hist_;
  SiftRls rls_;
  ImpcController controller_;
  WarmupNoise noise_;
  CoefficientVector theta_;
  long k_ = 0;
  double next_u_ = 0.0;
  RunLog log_;
};

/// Runs cfg.steps steps. A controller failure stops the run; the log keeps
/// every completed step and the error message.
RunLog run_closed_loop(const SimConfig& cfg);

struct Window {
  long first = 1;
  long last = 1;
};

struct Metrics {
  Window window;
  double mean_abs_ec = 0.0;
  double mean_abs_ep = 0.0;
  double max_abs_u = 0.0;
  std::vector<double> log10_abs_ec;
  std::vector<double> log10_abs_ep;
};

/// log10|x| with exact zeros mapped to -16.
double log10_abs(double x);

/// Throws std::invalid_argument for an empty or out-of-range window.
Metrics metrics(const RunLog& log, Window window);

}  // namespace npcac
