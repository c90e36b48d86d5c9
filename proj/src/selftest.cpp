#include "npcac/selftest.hpp"

#include "npcac/impc.hpp"
#include "npcac/presets.hpp"
#include "npcac/report.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

namespace npcac {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Outcome {
  bool passed;
  std::string detail;
};

Outcome within(double worst, double tol) {
  std::ostringstream os;
  os << "max deviation " << worst << " (tolerance " << tol << ")";
  return {worst < tol, os.str()};
}

VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double shift) {
  MatrixXd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) A.col(j) = normal_vector(rng, n);
  return A * A.transpose() + shift * MatrixXd::Identity(n, n);
}

const CubicHermiteSpline kSpline{4, -6.0, 6.0};

Outcome spline_partition(const SelftestHooks& h) {
  const int n = kSpline.interior_nodes;
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = kSpline.node(1) + (kSpline.node(n) - kSpline.node(1)) * i / 1000.0;
    const VectorXd b = h.basis_eval(kSpline, x);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += b[2 * j];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return within(worst, 1e-12);
}

Outcome spline_interpolation(const SelftestHooks& h) {
  std::mt19937_64 rng(11);
  const int n = kSpline.interior_nodes;
  const VectorXd c = normal_vector(rng, 2 * n);
  auto f = [&](double x) { return c.dot(h.basis_eval(kSpline, x)); };
  const double step = 1e-6;
  double worst = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double s = kSpline.node(j);
    worst = std::max(worst, std::abs(f(s) - c[2 * (j - 1)]));
    const double slope = (f(s + step) - f(s - step)) / (2 * step);
    worst = std::max(worst, std::abs(slope - c[2 * (j - 1) + 1]));
  }
  return within(worst, 1e-5);
}

Outcome spline_c1(const SelftestHooks& h) {
  const double step = 1e-6;
  double worst = 0.0;
  for (int j = 1; j <= kSpline.interior_nodes + 1; ++j) {
    const double s = kSpline.node(j);
    const VectorXd left = h.basis_eval(kSpline, s - step), right = h.basis_eval(kSpline, s + step);
    const VectorXd left2 = h.basis_eval(kSpline, s - 2 * step), right2 = h.basis_eval(kSpline, s + 2 * step);
    worst = std::max(worst, (left - right).cwiseAbs().maxCoeff());
    const VectorXd dl = (left - left2) / step, dr = (right2 - right) / step;
    worst = std::max(worst, (dl - dr).cwiseAbs().maxCoeff());
  }
  return within(worst, 1e-5);
}

Outcome spline_support(const SelftestHooks& h) {
  double worst = 0.0;
  for (double x : {kSpline.domain_lo - 1e-9, kSpline.domain_lo - 3.0, kSpline.domain_hi, kSpline.domain_hi + 2.0})
    worst = std::max(worst, h.basis_eval(kSpline, x).cwiseAbs().maxCoeff());
  return within(worst, 1e-300);
}

Outcome fourier_bounded(const SelftestHooks& h) {
  const Fourier f{3, 6.0};
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = -30.0 + 60.0 * i / 2000.0;
    worst = std::max(worst, h.basis_eval(f, x).cwiseAbs().maxCoeff() - 1.0);
  }
  return {worst <= 0.0, "max |component| - 1 = " + std::to_string(worst)};
}

Outcome rls_inverse(const SelftestHooks&) {
  std::mt19937_64 rng(21);
  SiftRls rls = SiftRls::with_scaled_identity(VectorXd::Zero(5), 1.0, 0.3, 1e-4);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    rls.step(normal_vector(rng, 1)[0], normal_vector(rng, 5));
    const auto& s = rls.state();
    worst = std::max(worst, (s.P * s.R - MatrixXd::Identity(5, 5)).cwiseAbs().rowwise().sum().maxCoeff());
  }
  return within(worst, 1e-8);
}

Outcome rls_forgetting(const SelftestHooks& h) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> lam(0.05, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const int n = 1 + t % 6;
    const MatrixXd R = random_spd(rng, n, 0.1);
    const MatrixXd P = R.inverse();
    const VectorXd phi = normal_vector(rng, n);
    const double l = lam(rng);
    const ForgetResult f = h.forget(R, P, phi, l);
    const double lhs = phi.dot(f.R * phi), rhs = l * phi.dot(R * phi);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return within(worst, 1e-10);
}

Outcome rls_batch(const SelftestHooks&) {
  std::mt19937_64 rng(23);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5, steps = 5 + 2 * trial;
    const VectorXd theta0 = normal_vector(rng, n);
    const MatrixXd R0 = random_spd(rng, n, 0.5);
    SiftRls rls(theta0, R0, 1.0, 1e-12);
    MatrixXd info = R0;
    VectorXd rhs = R0 * theta0;
    for (int k = 0; k < steps; ++k) {
      const VectorXd phi = normal_vector(rng, n);
      const double y = normal_vector(rng, 1)[0];
      rls.step(y, phi);
      info += phi * phi.transpose();
      rhs += phi * y;
    }
    const VectorXd oracle = info.ldlt().solve(rhs);
    worst = std::max(worst, (rls.theta() - oracle).norm() / std::max(1.0, oracle.norm()));
  }
  return within(worst, 1e-8);
}

QpProblem random_horizon_qp(std::mt19937_64& rng, int l) {
  QpProblem p;
  MatrixXd Fp = MatrixXd::Zero(l, l), Gp = MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j <= i; ++j) {
      if (j < i) Fp(i, j) = 0.5 * normal_vector(rng, 1)[0];
      Gp(i, j) = normal_vector(rng, 1)[0];
    }
  p.A_eq.resize(l, 2 * l);
  p.A_eq << MatrixXd::Identity(l, l) - Fp, -Gp;
  p.b_eq = normal_vector(rng, l);
  p.H = random_spd(rng, 2 * l, 0.1);
  p.F = normal_vector(rng, 2 * l);
  return p;
}

VectorXd kkt_solve(const QpProblem& p) {
  const Eigen::Index n = p.H.rows(), m = p.A_eq.rows();
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = 2.0 * p.H;
  K.topRightCorner(n, m) = p.A_eq.transpose();
  K.bottomLeftCorner(m, n) = p.A_eq;
  VectorXd rhs(n + m);
  rhs << -p.F, p.b_eq;
  return K.fullPivLu().solve(rhs).head(n);
}

Outcome qp_kkt(const SelftestHooks& h) {
  std::mt19937_64 rng(24);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const QpProblem p = random_horizon_qp(rng, 1 + t % 8);
    const VectorXd z = h.qp_solver(p).z, oracle = kkt_solve(p);
    worst = std::max(worst, (z - oracle).cwiseAbs().maxCoeff() / std::max(1.0, oracle.cwiseAbs().maxCoeff()));
  }
  return within(worst, 1e-9);
}

Outcome qp_residual(const SelftestHooks& h) {
  std::mt19937_64 rng(25);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    QpProblem p = random_horizon_qp(rng, 1 + t % 8);
    if (t % 2) p.bounds = Bounds{-0.3, 0.3};
    const VectorXd z = h.qp_solver(p).z;
    worst = std::max(worst, (p.A_eq * z - p.b_eq).cwiseAbs().maxCoeff());
    if (p.bounds) {
      const Eigen::Index l = p.horizon();
      const double excess = std::max(z.tail(l).maxCoeff() - p.bounds->upper, p.bounds->lower - z.tail(l).minCoeff());
      worst = std::max(worst, excess);
    }
  }
  return within(worst, 1e-10);
}

HorizonState random_state(std::mt19937_64& rng, int n, int l) {
  HorizonState s;
  s.anchor = normal_vector(rng, 1)[0];
  for (int i = 0; i < n; ++i) {
    s.past_y.push_back(normal_vector(rng, 1)[0]);
    s.past_u.push_back(normal_vector(rng, 1)[0]);
  }
  s.command = normal_vector(rng, l);
  return s;
}

std::vector<SdcRow> random_sdc(std::mt19937_64& rng, int n, int l) {
  std::vector<SdcRow> rows(static_cast<std::size_t>(l));
  for (auto& r : rows) {
    for (int i = 0; i < n; ++i) {
      r.F.push_back(0.6 * normal_vector(rng, 1)[0]);
      r.G.push_back(normal_vector(rng, 1)[0]);
    }
    r.H = normal_vector(rng, 1)[0];
  }
  return rows;
}

Outcome impc_recursion(const SelftestHooks&) {
  std::mt19937_64 rng(26);
  HorizonConfig cfg;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 3, l = 1 + t % 9;
    cfg.horizon = l;
    const HorizonState s = random_state(rng, n, l);
    const auto sdc = random_sdc(rng, n, l);
    const VectorXd U = normal_vector(rng, l);
    const VectorXd Y = linear_rollout(sdc, s, U);
    const HorizonProblem hp = assemble(sdc, s, cfg);
    VectorXd z(2 * l);
    z << Y, U;
    worst = std::max(worst, (hp.qp.A_eq * z - hp.qp.b_eq).cwiseAbs().maxCoeff() / std::max(1.0, Y.cwiseAbs().maxCoeff()));
  }
  return within(worst, 1e-12);
}

Outcome impc_scalar(const SelftestHooks& h) {
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double a = normal_vector(rng, 1)[0], b = normal_vector(rng, 1)[0];
    HorizonConfig cfg;
    cfg.horizon = 1;
    cfg.Q = pos(rng);
    cfg.R = pos(rng);
    HorizonState s = random_state(rng, 1, 1);
    SdcRow row;
    row.F = {-a};
    row.G = {b};
    const HorizonProblem hp = assemble({row}, s, cfg);
    const double u = h.qp_solver(hp.qp).z[1];
    const double oracle = cfg.Q * b * (s.command[0] + a * s.anchor) / (cfg.Q * b * b + cfg.R);
    worst = std::max(worst, std::abs(u - oracle) / std::max(1.0, std::abs(oracle)));
  }
  return within(worst, 1e-10);
}

Outcome sim_determinism(const SelftestHooks&) {
  SimConfig cfg = preset("eg4-BL");
  cfg.steps = 60;
  const std::string a = run_csv(run_closed_loop(cfg)), b = run_csv(run_closed_loop(cfg));
  return {a == b, a == b ? "identical CSV bytes" : "CSV output differs between runs"};
}

struct Check {
  const char* name;
  Outcome (*fn)(const SelftestHooks&);
};

const std::vector<Check>& checks() {
  static const std::vector<Check> all{
      {"basis.spline_partition_of_unity", spline_partition},
      {"basis.spline_node_interpolation", spline_interpolation},
      {"basis.spline_c1_continuity", spline_c1},
      {"basis.spline_support", spline_support},
      {"basis.fourier_bounded", fourier_bounded},
      {"ident.inverse_pair", rls_inverse},
      {"ident.directional_forgetting", rls_forgetting},
      {"ident.batch_least_squares", rls_batch},
      {"qp.kkt_equivalence", qp_kkt},
      {"qp.feasibility", qp_residual},
      {"impc.constraint_recursion", impc_recursion},
      {"impc.scalar_oracle", impc_scalar},
      {"sim.determinism", sim_determinism},
  };
  return all;
}

}  // namespace

const std::vector<std::string>& selftest_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : checks()) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

std::vector<CheckResult> run_selftest(const SelftestHooks& hooks) {
  std::vector<CheckResult> out;
  for (const auto& c : checks()) {
    CheckResult r;
    r.name = c.name;
    try {
      const Outcome o = c.fn(hooks);
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace npcac
