#include "npcac/plant.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace npcac {

double evaluate(const CoefficientFn& fn, double y) {
  if (const auto* l = std::get_if<Linear>(&fn)) return l->c;
  if (const auto* a = std::get_if<AtanAffine>(&fn)) return a->c0 + a->c1 * std::atan(y);
  const auto& s = std::get<SinAffine>(fn);
  return s.c0 + s.c1 * std::sin(y);
}

std::string describe(const CoefficientFn& fn) {
  std::ostringstream os;
  if (const auto* l = std::get_if<Linear>(&fn)) os << l->c;
  else if (const auto* a = std::get_if<AtanAffine>(&fn)) os << a->c0 << " + " << a->c1 << " atan(y)";
  else {
    const auto& s = std::get<SinAffine>(fn);
    os << s.c0 << " + " << s.c1 << " sin(y)";
  }
  return os.str();
}

void PlantSpec::validate() const {
  if (order < 1) throw std::invalid_argument("plant order must be >= 1");
  if (static_cast<int>(F.size()) != order || static_cast<int>(G.size()) != order)
    throw std::invalid_argument("plant needs one F and one G coefficient per lag");
}

double plant_step(const PlantSpec& spec, std::span<const double> y_lags, std::span<const double> u_lags) {
  if (static_cast<int>(y_lags.size()) < spec.order || static_cast<int>(u_lags.size()) < spec.order)
    throw std::invalid_argument("insufficient history for plant step");
  double y = 0.0;
  for (int i = 0; i < spec.order; ++i) {
    const double lead = y_lags[i];
    y += -evaluate(spec.F[i], lead) * y_lags[i] + evaluate(spec.G[i], lead) * u_lags[i];
  }
  return y;
}

double plant_step(const PlantSpec& spec, const History& hist, long k) {
  if (!hist.covers(k - spec.order) || hist.latest() < k - 1)
    throw std::out_of_range("insufficient history for plant step");
  std::vector<double> ys(spec.order), us(spec.order);
  for (int i = 1; i <= spec.order; ++i) {
    ys[i - 1] = hist.y(k - i);
    us[i - 1] = hist.u(k - i);
  }
  return plant_step(spec, ys, us);
}

double CommandSpec::operator()(long k) const { return amplitude * std::sin(rate * static_cast<double>(k)); }

}  // namespace npcac
