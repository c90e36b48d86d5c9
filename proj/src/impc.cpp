#include "npcac/impc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <stdexcept>

namespace npcac {

namespace {

void check_state(const ModelStructure& structure, const HorizonState& state) {
  const auto n = static_cast<std::size_t>(structure.order);
  if (state.past_y.size() < n || state.past_u.size() < n)
    throw std::invalid_argument("horizon state needs order past outputs and controls");
  if (state.horizon() < 1) throw std::invalid_argument("horizon must be >= 1");
}

// Outputs on the prediction grid.
double y_at(const HorizonState& s, const Eigen::VectorXd& Y, long idx) {
  if (idx >= 2) return Y[idx - 2];
  if (idx == 1) return s.anchor;
  return s.past_y[static_cast<std::size_t>(-idx)];
}

double u_at(const HorizonState& s, const Eigen::VectorXd& U, long idx) {
  if (idx >= 1) return U[idx - 1];
  return s.past_u[static_cast<std::size_t>(-idx)];
}

}  // namespace

void HorizonConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (subiterations < 1) throw std::invalid_argument("subiteration count must be >= 1");
  if (!(Q >= 0.0) || !(R >= 0.0)) throw std::invalid_argument("weights Q and R must be >= 0");
  if (bounds && !(bounds->lower <= bounds->upper)) throw std::invalid_argument("infeasible bounds: u_min > u_max");
  if (!(broyden_tol > 0.0)) throw std::invalid_argument("Broyden tolerance must be positive");
}

double anchor_prediction(const ModelStructure& structure, const CoefficientVector& theta, const History& hist,
                         long k) {
  return predict(theta, regressor(structure, hist, k + 1));
}

Eigen::VectorXd rollout(const ModelStructure& structure, const CoefficientVector& theta, const HorizonState& state,
                        const Eigen::VectorXd& U) {
  check_state(structure, state);
  const auto l = state.horizon();
  if (U.size() != l) throw std::invalid_argument("control sequence length must equal the horizon");
  const int n = structure.order;

  Eigen::VectorXd Y(l);
  std::vector<double> ys(n), us(n);
  for (long i = 2; i <= l + 1; ++i) {
    for (int lag = 1; lag <= n; ++lag) {
      ys[lag - 1] = y_at(state, Y, i - lag);
      us[lag - 1] = u_at(state, U, i - lag);
    }
    const double y = predict(theta, regressor(structure, ys, us));
    if (!std::isfinite(y)) throw DivergedRollout("rollout diverged at prediction index " + std::to_string(i));
    Y[i - 2] = y;
  }
  return Y;
}

std::vector<SdcRow> build_sdc(const ModelStructure& structure, const CoefficientVector& theta,
                              const HorizonState& state, const Eigen::VectorXd& Y) {
  check_state(structure, state);
  const auto l = state.horizon();
  if (Y.size() != l) throw std::invalid_argument("trajectory length must equal the horizon");
  const int n = structure.order;

  std::vector<SdcRow> rows(static_cast<std::size_t>(l));
  for (long i = 2; i <= l + 1; ++i) {
    SdcRow& row = rows[static_cast<std::size_t>(i - 2)];
    row.F.resize(n);
    row.G.resize(n);
    for (int lag = 1; lag <= n; ++lag) {
      const double lead = y_at(state, Y, i - lag);
      row.F[lag - 1] = -eval_Fhat(structure, theta, lag, lead);
      row.G[lag - 1] = eval_Ghat(structure, theta, lag, lead);
    }
    row.H = eval_Hterm(structure, theta, y_at(state, Y, i - 1));
  }
  return rows;
}

Eigen::VectorXd linear_rollout(const std::vector<SdcRow>& sdc, const HorizonState& state, const Eigen::VectorXd& U) {
  const auto l = static_cast<long>(sdc.size());
  if (l != state.horizon() || U.size() != l) throw std::invalid_argument("SDC rows, controls and horizon disagree");
  Eigen::VectorXd Y(l);
  for (long i = 2; i <= l + 1; ++i) {
    const SdcRow& row = sdc[static_cast<std::size_t>(i - 2)];
    double y = row.H;
    for (std::size_t lag = 1; lag <= row.F.size(); ++lag) {
      const long at = i - static_cast<long>(lag);
      y += row.F[lag - 1] * y_at(state, Y, at) + row.G[lag - 1] * u_at(state, U, at);
    }
    Y[i - 2] = y;
  }
  return Y;
}

HorizonProblem assemble(const std::vector<SdcRow>& sdc, const HorizonState& state, const HorizonConfig& config) {
  const auto l = static_cast<long>(sdc.size());
  if (l != state.horizon()) throw std::invalid_argument("SDC rows and command window disagree");
  if (l < 1) throw std::invalid_argument("horizon must be >= 1");
  const int n = static_cast<int>(sdc.front().F.size());
  if (state.past_y.size() < static_cast<std::size_t>(n) || state.past_u.size() < static_cast<std::size_t>(n))
    throw std::invalid_argument("horizon state needs order past outputs and controls");

  HorizonProblem hp;
  hp.Fp = Eigen::MatrixXd::Zero(l, l);
  hp.Gp = Eigen::MatrixXd::Zero(l, l);
  hp.Fd = Eigen::MatrixXd::Zero(l, n);
  hp.Gd = Eigen::MatrixXd::Zero(l, n - 1);
  hp.Hbar.resize(l);

  // D = outputs at grid indices 2-n .. 1, then controls at 2-n .. 0
  hp.D.resize(2 * n - 1);
  for (int m = 2 - n; m <= 1; ++m) hp.D[m + n - 2] = y_at(state, Eigen::VectorXd(), m);
  for (int m = 2 - n; m <= 0; ++m) hp.D[n + (m + n - 2)] = u_at(state, Eigen::VectorXd(), m);

  for (long i = 2; i <= l + 1; ++i) {
    const long r = i - 2;
    const SdcRow& row = sdc[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.F.size()) != n || static_cast<int>(row.G.size()) != n)
      throw std::invalid_argument("SDC rows must share the model order");
    hp.Hbar[r] = row.H;
    for (int lag = 1; lag <= n; ++lag) {
      const long at = i - lag;
      if (at >= 2) hp.Fp(r, at - 2) = row.F[lag - 1];
      else hp.Fd(r, at + n - 2) = row.F[lag - 1];
      if (at >= 1) hp.Gp(r, at - 1) = row.G[lag - 1];
      else hp.Gd(r, at + n - 2) = row.G[lag - 1];
    }
  }

  QpProblem& qp = hp.qp;
  qp.A_eq.resize(l, 2 * l);
  qp.A_eq << Eigen::MatrixXd::Identity(l, l) - hp.Fp, -hp.Gp;
  qp.b_eq = hp.Fd * hp.D.head(n) + hp.Gd * hp.D.tail(n - 1) + hp.Hbar;

  qp.H = Eigen::MatrixXd::Zero(2 * l, 2 * l);
  qp.H.diagonal().head(l).setConstant(config.Q);
  qp.H.diagonal().tail(l).setConstant(config.R);
  qp.F = Eigen::VectorXd::Zero(2 * l);
  qp.F.head(l) = -2.0 * config.Q * state.command;
  qp.bounds = config.bounds;
  return hp;
}

FixedPointEval fixed_point_map(const ModelStructure& structure, const CoefficientVector& theta,
                               const HorizonState& state, const HorizonConfig& config, const Eigen::VectorXd& U) {
  const Eigen::VectorXd Y = rollout(structure, theta, state, U);
  HorizonProblem hp = assemble(build_sdc(structure, theta, state, Y), state, config);
  hp.qp.initial_guess.resize(2 * U.size());
  hp.qp.initial_guess << Y, U;
  QpSolution sol = solve_qp(hp.qp);
  const auto l = U.size();
  return FixedPointEval{sol.z.tail(l), sol.z.head(l), sol.diagnostics};
}

SubiterationResult subiterate(const ModelStructure& structure, const CoefficientVector& theta,
                              const HorizonState& state, const HorizonConfig& config, const Eigen::VectorXd& U0) {
  config.validate();
  const auto l = U0.size();
  SubiterationResult result;
  auto& diag = result.diagnostics;

  auto evaluate = [&](const Eigen::VectorXd& U) -> std::optional<FixedPointEval> {
    ++diag.evaluations;
    try {
      FixedPointEval e = fixed_point_map(structure, theta, state, config, U);
      diag.qp_iterations += e.qp.iterations;
      diag.ridge_applied = diag.ridge_applied || e.qp.ridge_applied;
      if (!e.U.allFinite()) {
        diag.diverged = true;
        return std::nullopt;
      }
      return e;
    } catch (const DivergedRollout&) {
      diag.diverged = true;
      return std::nullopt;
    }
  };

  auto first = evaluate(U0);
  if (!first) {
    // no finite iterate at all: hold the warm start
    result.U = U0;
    if (config.bounds) result.U = U0.cwiseMax(config.bounds->lower).cwiseMin(config.bounds->upper);
    result.Y = Eigen::VectorXd::Constant(l, std::numeric_limits<double>::quiet_NaN());
    diag.residual = std::numeric_limits<double>::infinity();
    return result;
  }

  Eigen::VectorXd U = U0;
  FixedPointEval at = std::move(*first);
  Eigen::VectorXd g = at.U - U;
  diag.accepted_residuals.push_back(g.norm());

  // inverse Jacobian estimate of g; -I makes the first step plain fixed-point iteration
  Eigen::MatrixXd B = -Eigen::MatrixXd::Identity(l, l);
  bool plain = true;
  double damping = 1.0;

  while (diag.evaluations < config.subiterations) {
    if (g.norm() < config.broyden_tol * (1.0 + U.norm())) break;

    const Eigen::VectorXd trial = U - damping * (B * g);
    auto next = evaluate(trial);
    const bool accept = next && (next->U - trial).norm() <= g.norm();
    if (!accept) {
      if (plain) damping *= 0.5;
      B = -Eigen::MatrixXd::Identity(l, l);
      plain = true;
      continue;
    }

    const Eigen::VectorXd g_next = next->U - trial;
    const Eigen::VectorXd s = trial - U;
    const Eigen::VectorXd dg = g_next - g;
    const Eigen::VectorXd Bdg = B * dg;
    const double denom = s.dot(Bdg);
    if (std::abs(denom) > 1e-300 && std::isfinite(denom)) {
      B += ((s - Bdg) * (s.transpose() * B)) / denom;
      plain = false;
    }
    damping = 1.0;
    U = trial;
    g = g_next;
    at = std::move(*next);
    diag.accepted_residuals.push_back(g.norm());
  }

  diag.converged = g.norm() < config.broyden_tol * (1.0 + U.norm());
  diag.residual = g.lpNorm<Eigen::Infinity>();
  result.U = at.U;
  result.Y = at.Y;
  return result;
}

ImpcController::ImpcController(ModelStructure structure, HorizonConfig config)
    : structure_(std::move(structure)), config_(std::move(config)) {
  structure_.validate();
  config_.validate();
}

ControlDecision ImpcController::compute_control(const CoefficientVector& theta, const HorizonState& state) {
  const auto l = static_cast<Eigen::Index>(config_.horizon);
  if (state.horizon() != l) throw std::invalid_argument("command window length must equal the horizon");

  Eigen::VectorXd U0(l);
  if (previous_ && previous_->size() == l) {
    U0.head(l - 1) = previous_->tail(l - 1);
    U0[l - 1] = (*previous_)[l - 1];
  } else {
    U0.setConstant(state.past_u.front());
  }

  SubiterationResult sub = subiterate(structure_, theta, state, config_, U0);
  ControlDecision decision;
  decision.U = sub.U;
  decision.u = sub.U[0];
  if (config_.bounds) decision.u = std::clamp(decision.u, config_.bounds->lower, config_.bounds->upper);
  decision.diagnostics = std::move(sub.diagnostics);
  previous_ = decision.U;
  return decision;
}

}  // namespace npcac
