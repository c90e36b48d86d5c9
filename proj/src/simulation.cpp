#include "npcac/simulation.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace npcac {

Eigen::MatrixXd RlsConfig::R0() const {
  if (r0_scale) {
    const auto n = theta0.size();
    return *r0_scale * Eigen::MatrixXd::Identity(n, n);
  }
  return r0_matrix;
}

void SimConfig::validate() const {
  try {
    model.validate();
    plant.validate();
    mpc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (steps <= model.order) throw ConfigError("steps must exceed the model order");
  if (rls.theta0.size() != model.phi_dim())
    throw ConfigError("theta0 has length " + std::to_string(rls.theta0.size()) + " but the model implies phi_dim = " +
                      std::to_string(model.phi_dim()));
  if (!rls.r0_scale && (rls.r0_matrix.rows() != model.phi_dim() || rls.r0_matrix.cols() != model.phi_dim()))
    throw ConfigError("R0 matrix must be " + std::to_string(model.phi_dim()) + " x " +
                      std::to_string(model.phi_dim()));
  if (rls.r0_scale && !(*rls.r0_scale > 0.0)) throw ConfigError("scalar R0 must be positive");
  if (!(rls.lambda > 0.0 && rls.lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
  if (!(rls.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(sigma_u >= 0.0)) throw ConfigError("sigma_u must be >= 0");
  if (!std::isfinite(y0) || !std::isfinite(u0)) throw ConfigError("initial output and input must be finite");
}

double WarmupNoise::uniform() {
  // (0, 1]: never zero, so the logarithm below stays finite
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double WarmupNoise::normal(double stddev) {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return stddev * z;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  return stddev * radius * std::cos(angle);
}

namespace {

SiftRls make_rls(const SimConfig& cfg) {
  cfg.validate();
  try {
    return SiftRls(cfg.rls.theta0, cfg.rls.R0(), cfg.rls.lambda, cfg.rls.epsilon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ClosedLoop::ClosedLoop(SimConfig cfg)
    : cfg_(std::move(cfg)),
      hist_(std::max(cfg_.model.order, cfg_.plant.order) + 2, 0),
      rls_(make_rls(cfg_)),
      controller_(cfg_.model, cfg_.mpc),
      noise_(cfg_.seed),
      theta_(cfg_.model, cfg_.rls.theta0) {
  hist_.push(cfg_.y0, cfg_.u0);
  next_u_ = cfg_.u0;
  log_.records.reserve(static_cast<std::size_t>(cfg_.steps));
}

const StepRecord& ClosedLoop::advance(std::optional<double> output_override) {
  const auto started = std::chrono::steady_clock::now();
  const long k = ++k_;
  const int n = cfg_.model.order;

  StepRecord rec;
  rec.k = k;
  rec.y = output_override ? *output_override : plant_step(cfg_.plant, hist_, k);
  rec.u = next_u_;
  hist_.push(rec.y, rec.u);
  rec.r = cfg_.command(k);
  rec.e_c = rec.r - rec.y;
  rec.theta = theta_.values();

  const Eigen::VectorXd phi = regressor(cfg_.model, hist_, k);
  if (k >= n) {
    rec.e_p = rls_.step(rec.y, phi).prediction_error;
    theta_ = CoefficientVector(cfg_.model, rls_.theta());

    HorizonState state;
    state.anchor = anchor_prediction(cfg_.model, theta_, hist_, k);
    state.past_y.resize(n);
    state.past_u.resize(n);
    for (int i = 0; i < n; ++i) {
      state.past_y[i] = hist_.y(k - i);
      state.past_u[i] = hist_.u(k - i);
    }
    const int l = cfg_.mpc.horizon;
    state.command.resize(l);
    for (int i = 0; i < l; ++i) state.command[i] = cfg_.command(k + 2 + i);

    ControlDecision decision = controller_.compute_control(theta_, state);
    next_u_ = decision.u;
    rec.subiterations = decision.diagnostics.evaluations;
    rec.residual = decision.diagnostics.residual;
    rec.ridge = decision.diagnostics.ridge_applied;
    rec.diverged = decision.diagnostics.diverged;
    rec.qp_iterations = decision.diagnostics.qp_iterations;
  } else {
    rec.e_p = prediction_error(theta_, phi, rec.y);
    next_u_ = noise_.normal(cfg_.sigma_u);
  }

  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  log_.records.push_back(std::move(rec));
  return log_.records.back();
}

RunLog run_closed_loop(const SimConfig& cfg) {
  ClosedLoop loop(cfg);
  RunLog log;
  try {
    while (loop.step() < cfg.steps) loop.advance();
  } catch (const std::exception& e) {
    log = loop.log();
    log.error = "step " + std::to_string(loop.step()) + ": " + e.what();
    return log;
  }
  return loop.log();
}

double log10_abs(double x) {
  if (x == 0.0) return -16.0;
  return std::log10(std::abs(x));
}

Metrics metrics(const RunLog& log, Window window) {
  if (window.first < 1 || window.last < window.first) throw std::invalid_argument("empty metrics window");
  Metrics m;
  m.window = window;
  long count = 0;
  for (const auto& rec : log.records) {
    if (rec.k < window.first || rec.k > window.last) continue;
    ++count;
    m.mean_abs_ec += std::abs(rec.e_c);
    m.mean_abs_ep += std::abs(rec.e_p);
    m.max_abs_u = std::max(m.max_abs_u, std::abs(rec.u));
    m.log10_abs_ec.push_back(log10_abs(rec.e_c));
    m.log10_abs_ep.push_back(log10_abs(rec.e_p));
  }
  if (count == 0) throw std::invalid_argument("metrics window holds no steps");
  m.mean_abs_ec /= static_cast<double>(count);
  m.mean_abs_ep /= static_cast<double>(count);
  return m;
}

}  // namespace npcac
