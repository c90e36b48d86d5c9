#pragma once

/**
 * @file plant.hpp
 * @brief Benchmark pseudo-linear plants and the command generator.
 *
 *   y_k = sum_{i=1..n} -F_i(y_{k-i}) y_{k-i} + G_i(y_{k-i}) u_{k-i}
 */

#include "npcac/model.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace npcac {

struct Linear {
  double c = 0.0;
};
struct AtanAffine {
  double c0 = 0.0;
  double c1 = 0.0;
};
struct SinAffine {
  double c0 = 0.0;
  double c1 = 0.0;
};

/// Coefficient function of the leading window entry.
using CoefficientFn = std::variant<Linear, AtanAffine, SinAffine>;

double evaluate(const CoefficientFn& fn, double y);
std::string describe(const CoefficientFn& fn);

struct PlantSpec {
  int order = 1;
  std::vector<CoefficientFn> F;
  std::vector<CoefficientFn> G;

  void validate() const;
};

/// y_lags[i-1] = y_{k-i}, u_lags[i-1] = u_{k-i}.
double plant_step(const PlantSpec& spec, std::span<const double> y_lags, std::span<const double> u_lags);
/// Output at step k from the recorded history.
double plant_step(const PlantSpec& spec, const History& hist, long k);

/// r_k = amplitude * sin(rate * k)
struct CommandSpec {
  double amplitude = 0.0;
  double rate = 0.0;

  double operator()(long k) const;
};

}  // namespace npcac
