#include "npcac/presets.hpp"

#include <numbers>

namespace npcac {

namespace {

enum class Plant { Eg1Atan, Eg3Atan, Sin };

PlantSpec make_plant(Plant which) {
  PlantSpec p;
  p.order = 1;
  p.F = {Linear{-1.1}};
  switch (which) {
    case Plant::Eg1Atan: p.G = {AtanAffine{0.9, 0.5}}; break;
    case Plant::Eg3Atan: p.G = {AtanAffine{0.4, 0.5}}; break;
    case Plant::Sin: p.G = {SinAffine{0.4, 0.5}}; break;
  }
  return p;
}

Eigen::VectorXd initial_theta(int length) {
  Eigen::VectorXd t = Eigen::VectorXd::Constant(length, 0.01);
  t[0] = 1.0;
  return t;
}

// Settings shared by every benchmark.
SimConfig base(const std::string& name, Plant plant) {
  SimConfig c;
  c.name = name;
  c.steps = 500;
  c.y0 = 0.1;
  c.u0 = 0.0;
  c.sigma_u = 0.01;
  c.u_a = 0.1;
  c.seed = 1;
  c.rls.epsilon = 1e-4;
  c.mpc.Q = 1.0;
  c.command = CommandSpec{std::numbers::pi, 0.05};
  c.plant = make_plant(plant);
  return c;
}

SimConfig linear(const std::string& name, Plant plant, double R) {
  SimConfig c = base(name, plant);
  c.model = ModelStructure::uniform(1, Constant{}, Constant{});
  c.rls.theta0 = initial_theta(2);
  c.rls.r0_scale = 1e-3;
  c.rls.lambda = 0.1;
  c.mpc.horizon = 10;
  c.mpc.subiterations = 1;
  c.mpc.R = R;
  return c;
}

SimConfig nonlinear(const std::string& name, Plant plant, const BasisSpec& g, double lambda, double r0, double R) {
  SimConfig c = base(name, plant);
  c.model = ModelStructure::uniform(1, Constant{}, g);
  c.rls.theta0 = initial_theta(c.model.phi_dim());
  c.rls.r0_scale = r0;
  c.rls.lambda = lambda;
  c.mpc.horizon = 20;
  c.mpc.subiterations = 10;
  c.mpc.R = R;
  return c;
}

const BasisSpec kPb2 = Polynomial{1};
const BasisSpec kFb3 = Fourier{1, 6.0};
const BasisSpec kFb5 = Fourier{2, 6.0};
const BasisSpec kCb4 = CubicHermiteSpline{2, -6.0, 6.0};

}  // namespace

std::vector<std::string> preset_names() {
  return {"eg1",     "eg3",     "eg4-BL",  "eg4-PB2", "eg4-FB3", "eg4-CB4", "eg5-BL",
          "eg5-PB2", "eg5-FB3", "eg5-CB4", "eg6-BL",  "eg6-PB2", "eg6-FB5", "eg6-CB4"};
}

SimConfig preset(const std::string& name) {
  if (name == "eg1") return linear(name, Plant::Eg1Atan, 1e-2);
  if (name == "eg3") return linear(name, Plant::Eg3Atan, 1.0);

  if (name == "eg4-BL") return nonlinear(name, Plant::Eg3Atan, AtanPair{}, 0.1, 1e-3, 0.0);
  if (name == "eg4-PB2") return nonlinear(name, Plant::Eg3Atan, kPb2, 0.1, 1e-2, 2e-4);
  if (name == "eg4-FB3") return nonlinear(name, Plant::Eg3Atan, kFb3, 0.3, 1e-1, 4e-3);
  if (name == "eg4-CB4") return nonlinear(name, Plant::Eg3Atan, kCb4, 0.1, 1e-3, 7e-4);

  if (name == "eg5-BL" || name == "eg6-BL") return nonlinear(name, Plant::Sin, SinPair{}, 0.1, 1e-3, 0.0);
  if (name == "eg5-PB2" || name == "eg6-PB2") return nonlinear(name, Plant::Sin, kPb2, 0.1, 1e-2, 1.0);
  if (name == "eg5-FB3") return nonlinear(name, Plant::Sin, kFb3, 0.3, 1.0, 4e-1);
  if (name == "eg5-CB4" || name == "eg6-CB4") return nonlinear(name, Plant::Sin, kCb4, 0.7, 1e-1, 8e-4);
  if (name == "eg6-FB5") return nonlinear(name, Plant::Sin, kFb5, 0.3, 1.0, 4e-1);

  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace npcac
