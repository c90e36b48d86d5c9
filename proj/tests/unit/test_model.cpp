#include "npcac/model.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace npcac;

TEST_SUITE("model") {

TEST_CASE("dimensions follow the dictionaries") {
  const auto s = ModelStructure::uniform(2, Constant{}, Fourier{2, 6.0}, Constant{});
  CHECK(s.f_dim() == 1);
  CHECK(s.g_dim() == 5);
  CHECK(s.h_dim() == 1);
  CHECK(s.phi_dim() == 2 * (1 + 5) + 1);
  CHECK(ModelStructure::uniform(1, Constant{}, Constant{}).phi_dim() == 2);
}

TEST_CASE("structure validation") {
  ModelStructure s = ModelStructure::uniform(2, Constant{}, Polynomial{1});
  s.g_specs.pop_back();
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  ModelStructure mixed = ModelStructure::uniform(2, Constant{}, Polynomial{1});
  mixed.g_specs[1] = Polynomial{2};
  CHECK_THROWS_AS(mixed.validate(), std::invalid_argument);
  ModelStructure zero_order;
  zero_order.order = 0;
  CHECK_THROWS_AS(zero_order.validate(), std::invalid_argument);
}

TEST_CASE("coefficient partition") {
  const auto s = ModelStructure::uniform(2, Polynomial{1}, AtanPair{}, Constant{});
  Eigen::VectorXd v(9);
  v << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const CoefficientVector theta(s, v);
  CHECK(theta.F(1)[0] == 1);
  CHECK(theta.F(2)[1] == 4);
  CHECK(theta.G(1)[0] == 5);
  CHECK(theta.G(2)[1] == 8);
  CHECK(theta.H()[0] == 9);
  const auto back = CoefficientVector::concat(s, {theta.F(1), theta.F(2)}, {theta.G(1), theta.G(2)}, theta.H());
  CHECK(back.values() == v);
  CHECK_THROWS_AS(theta.F(3), std::out_of_range);
}

TEST_CASE("wrong coefficient length names both lengths") {
  const auto s = ModelStructure::uniform(1, Constant{}, Constant{});
  try {
    CoefficientVector(s, Eigen::VectorXd::Zero(3));
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find('3') != std::string::npos);
    CHECK(msg.find('2') != std::string::npos);
  }
}

TEST_CASE("estimated input coefficient") {
  const auto s = ModelStructure::uniform(1, Constant{}, AtanPair{});
  Eigen::VectorXd v(3);
  v << 1.0, 0.4, 0.5;
  CHECK(eval_Ghat(s, CoefficientVector(s, v), 1, 0.0) == doctest::Approx(0.4));
  v << 1.0, 0.9, 0.5;
  CHECK(eval_Ghat(s, CoefficientVector(s, v), 1, 1.0) == doctest::Approx(0.9 + 0.5 * std::numbers::pi / 4).epsilon(1e-14));
  CHECK(eval_Fhat(s, CoefficientVector(s, v), 1, 7.0) == 1.0);
  CHECK(eval_Hterm(s, CoefficientVector(s, v), 7.0) == 0.0);
}

TEST_CASE("regressor layout") {
  const auto s = ModelStructure::uniform(2, Polynomial{1}, AtanPair{}, Constant{});
  const double ys[] = {0.5, -1.5};
  const double us[] = {2.0, 3.0};
  const Eigen::VectorXd phi = regressor(s, ys, us);
  REQUIRE(phi.size() == 9);
  CHECK(phi[0] == -0.5);
  CHECK(phi[1] == -0.5 * 0.5);
  CHECK(phi[2] == 1.5);
  CHECK(phi[3] == -1.5 * 1.5);
  CHECK(phi[4] == 2.0);
  CHECK(phi[5] == doctest::Approx(2.0 * std::atan(0.5)));
  CHECK(phi[6] == 3.0);
  CHECK(phi[7] == doctest::Approx(3.0 * std::atan(-1.5)));
  CHECK(phi[8] == 1.0);
}

TEST_CASE("prediction equals the pseudo-linear sum") {
  std::mt19937_64 rng(3);
  const auto s = ModelStructure::uniform(3, Polynomial{2}, Fourier{2, 6.0});
  for (int t = 0; t < 200; ++t) {
    const CoefficientVector theta(s, oracle::normal(rng, s.phi_dim()));
    const Eigen::VectorXd y = oracle::normal(rng, 3, 2.0), u = oracle::normal(rng, 3);
    const Eigen::VectorXd phi = regressor(s, {y.data(), 3}, {u.data(), 3});
    double want = 0.0;
    for (int i = 1; i <= 3; ++i)
      want += -eval_Fhat(s, theta, i, y[i - 1]) * y[i - 1] + eval_Ghat(s, theta, i, y[i - 1]) * u[i - 1];
    CHECK(std::abs(predict(theta, phi) - want) < 1e-14 * std::max(1.0, std::abs(want)) * 10);
    CHECK(prediction_error(theta, phi, want + 1.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("history ring buffer") {
  History h(3, 0);
  CHECK_THROWS_AS(h.y(0), std::out_of_range);
  for (int k = 0; k < 5; ++k) h.push(10.0 * k, -1.0 * k);
  CHECK(h.latest() == 4);
  CHECK(h.y(4) == 40.0);
  CHECK(h.u(2) == -2.0);
  CHECK_THROWS_AS(h.y(1), std::out_of_range);
  CHECK_THROWS_AS(h.y(5), std::out_of_range);
  h.set_latest_y(7.0);
  CHECK(h.y(4) == 7.0);

  History early(4, 0);
  early.push(1.0, 2.0);
  CHECK(early.y(-1) == 0.0);
  CHECK(early.u(-3) == 0.0);
  CHECK(early.covers(-5));
}

TEST_CASE("regressor from history matches the lag form") {
  const auto s = ModelStructure::uniform(2, Constant{}, Polynomial{1});
  History h(4, 0);
  h.push(0.1, 0.0);
  h.push(0.2, 0.3);
  h.push(0.4, -0.1);
  const double ys[] = {0.4, 0.2};
  const double us[] = {-0.1, 0.3};
  CHECK((regressor(s, h, 3) - regressor(s, ys, us)).norm() == 0.0);
  CHECK_THROWS_AS(regressor(s, h, 9), std::out_of_range);
}

}
