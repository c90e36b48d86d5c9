#include "npcac/presets.hpp"
#include "npcac/report.hpp"
#include "npcac/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <span>

using namespace npcac;

namespace {

SimConfig zero_plant() {
  SimConfig c = preset("eg1");
  c.plant = PlantSpec{1, {Linear{0.0}}, {Linear{0.0}}};
  c.command = CommandSpec{0.0, 0.05};
  c.y0 = 0.0;
  c.steps = 50;
  return c;
}

// Second-order linear plant with a two-step warmup.
SimConfig second_order(std::uint64_t seed) {
  SimConfig c = preset("eg1");
  c.plant = PlantSpec{2, {Linear{-0.5}, Linear{0.2}}, {Linear{1.0}, Linear{0.3}}};
  c.model = ModelStructure::uniform(3, Constant{}, Constant{});
  c.rls.theta0 = Eigen::VectorXd::Constant(6, 0.01);
  c.rls.theta0[0] = 1.0;
  c.seed = seed;
  c.steps = 120;
  return c;
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("zero plant and zero command give zero error") {
  const RunLog log = run_closed_loop(zero_plant());
  REQUIRE(log.ok());
  REQUIRE(log.records.size() == 50);
  for (const auto& r : log.records) {
    CHECK(r.y == 0.0);
    CHECK(r.e_c == 0.0);
  }
}

TEST_CASE("identical configurations give identical logs") {
  for (const auto& name : {"eg1", "eg4-BL", "eg6-FB5"}) {
    SimConfig c = preset(name);
    c.steps = 150;
    CHECK(run_csv(run_closed_loop(c)) == run_csv(run_closed_loop(c)));
  }
  CHECK(run_csv(run_closed_loop(second_order(3))) == run_csv(run_closed_loop(second_order(3))));
}

TEST_CASE("warmup draws depend on the seed") {
  const RunLog a = run_closed_loop(second_order(1)), b = run_closed_loop(second_order(2));
  CHECK(a.records[0].u == 0.0);
  CHECK(a.records[1].u != b.records[1].u);
  CHECK(a.records[2].u != b.records[2].u);
  CHECK(a.records[1].subiterations == 0);
  CHECK(a.records[2].subiterations > 0);
}

TEST_CASE("first-order presets have no warmup") {
  const RunLog log = run_closed_loop(preset("eg3"));
  CHECK(log.records[0].u == 0.0);
  CHECK(log.records[0].subiterations == 1);
}

TEST_CASE("the next control ignores the next output") {
  SimConfig c = preset("eg4-BL");
  c.steps = 80;
  for (long k : {5L, 20L, 40L}) {
    ClosedLoop a(c), b(c);
    for (long j = 1; j < k; ++j) {
      a.advance();
      b.advance();
    }
    a.advance();
    b.advance();
    const double u_next = a.pending_control();
    CHECK(b.pending_control() == u_next);
    // u_{k+1} was fixed at step k; a different y_{k+1} cannot change it
    const double y_k = a.log().records.back().y, u_k = a.log().records.back().u;
    const double y_next = plant_step(c.plant, std::span<const double>(&y_k, 1), std::span<const double>(&u_k, 1));
    a.advance(y_next + 0.25);
    b.advance(y_next - 0.25);
    CHECK(a.log().records.back().u == u_next);
    CHECK(b.log().records.back().u == u_next);
  }
}

TEST_CASE("warmup noise has the requested spread") {
  WarmupNoise noise(42);
  const int n = 10000;
  const double sigma = 0.01;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = noise.normal(sigma);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  // standard error of the sample standard deviation is sigma / sqrt(2(n-1))
  CHECK(std::abs(sd - sigma) < 3.0 * sigma / std::sqrt(2.0 * (n - 1)));
  CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(double(n)));
}

TEST_CASE("warmup stream is fixed by the seed") {
  WarmupNoise a(7), b(7), c(8);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal(1.0);
    CHECK(x == b.normal(1.0));
    CHECK(x != c.normal(1.0));
  }
}

TEST_CASE("identified model used as the plant is predicted exactly") {
  // the plant lies in the model class, so the estimate converges to it
  SimConfig c = preset("eg4-BL");
  c.steps = 300;
  const RunLog learn = run_closed_loop(c);
  REQUIRE(learn.ok());
  const CoefficientVector theta(c.model, learn.records.back().theta);

  SimConfig replay = c;
  replay.plant = PlantSpec{1, {Linear{theta.F(1)[0]}}, {AtanAffine{theta.G(1)[0], theta.G(1)[1]}}};
  replay.rls.theta0 = theta.values();
  replay.rls.r0_scale = 1e6;
  replay.steps = 100;
  const RunLog log = run_closed_loop(replay);
  REQUIRE(log.ok());
  for (const auto& r : log.records) CHECK(std::abs(r.e_p) < 1e-12 * std::max(1.0, std::abs(r.y)));
}

TEST_CASE("example 1 error decays") {
  const RunLog log = run_closed_loop(preset("eg1"));
  REQUIRE(log.ok());
  CHECK(metrics(log, {301, 500}).mean_abs_ec < metrics(log, {1, 100}).mean_abs_ec);
}

TEST_CASE("controller failures keep the completed steps") {
  SimConfig c = preset("eg4-FB3");
  const RunLog log = run_closed_loop(c);
  if (!log.ok()) {
    CHECK(log.error.rfind("step ", 0) == 0);
    CHECK(log.records.size() < static_cast<std::size_t>(c.steps));
    CHECK(log.records.back().k == static_cast<long>(log.records.size()));
  }
}

TEST_CASE("metrics") {
  RunLog log;
  const double ec[] = {1, -1, 1, -1};
  for (int k = 1; k <= 4; ++k) {
    StepRecord r;
    r.k = k;
    r.e_c = ec[k - 1];
    r.u = k;
    log.records.push_back(r);
  }
  CHECK(metrics(log, {1, 4}).mean_abs_ec == 1.0);
  CHECK(metrics(log, {3, 3}).mean_abs_ec == 1.0);
  CHECK(metrics(log, {2, 4}).max_abs_u == 4.0);
  CHECK(metrics(log, {1, 4}).mean_abs_ep == 0.0);
  CHECK(metrics(log, {1, 2}).log10_abs_ep[0] == -16.0);
  CHECK_THROWS_AS(metrics(log, {3, 2}), std::invalid_argument);
  CHECK_THROWS_AS(metrics(log, {7, 9}), std::invalid_argument);
  CHECK(log10_abs(0.0) == -16.0);
  CHECK(log10_abs(-100.0) == 2.0);
}

TEST_CASE("configuration checks") {
  SimConfig c = preset("eg4-CB4");
  c.rls.theta0 = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  SimConfig d = preset("eg1");
  d.rls.lambda = 0.0;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  CHECK_THROWS_AS(ClosedLoop{d}, ConfigError);
}

TEST_CASE("presets") {
  CHECK(preset_names().size() >= 12);
  for (const auto& n : preset_names()) CHECK_NOTHROW(preset(n).validate());
  CHECK_THROWS_AS(preset("eg2"), ConfigError);

  const SimConfig cb4 = preset("eg4-CB4");
  const auto* spline = std::get_if<CubicHermiteSpline>(&cb4.model.g_specs[0]);
  REQUIRE(spline);
  CHECK(spline->interior_nodes == 2);
  CHECK(spline->domain_lo == -6.0);
  CHECK(spline->domain_hi == 6.0);
  CHECK(cb4.rls.theta0.size() == 5);
  CHECK(cb4.rls.lambda == 0.1);
  CHECK(*cb4.rls.r0_scale == 1e-3);
  CHECK(cb4.mpc.R == 7e-4);
  CHECK(cb4.mpc.horizon == 20);
  CHECK(cb4.mpc.subiterations == 10);

  const SimConfig fb5 = preset("eg6-FB5");
  const auto* fourier = std::get_if<Fourier>(&fb5.model.g_specs[0]);
  REQUIRE(fourier);
  CHECK(fourier->harmonics == 2);
  CHECK(fourier->half_period == 6.0);
  CHECK(*fb5.rls.r0_scale == 1.0);
  CHECK(fb5.mpc.R == 0.4);
  CHECK(fb5.rls.lambda == 0.3);

  const SimConfig eg1 = preset("eg1");
  CHECK(eg1.mpc.horizon == 10);
  CHECK(eg1.mpc.subiterations == 1);
  CHECK(eg1.mpc.R == 1e-2);
  CHECK(preset("eg3").mpc.R == 1.0);
  for (const auto& n : preset_names()) {
    const SimConfig c = preset(n);
    CHECK(c.y0 == 0.1);
    CHECK(c.u0 == 0.0);
    CHECK(c.rls.epsilon == 1e-4);
    CHECK(c.sigma_u == 0.01);
    CHECK(c.mpc.Q == 1.0);
    CHECK(c.command.amplitude == std::numbers::pi);
    CHECK(c.command.rate == 0.05);
    CHECK_FALSE(c.mpc.bounds.has_value());
  }
}

}
