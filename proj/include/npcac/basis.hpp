#pragma once

/**
 * @file basis.hpp
 * @brief Scalar-argument basis-function dictionaries.
 *
 * Every family maps a real scalar to a fixed-length real vector:
 *
 *   Polynomial{n}         [1, x, ..., x^n]                               (n+1)
 *   Fourier{n, L}         [1, cos(pi x/L), sin(pi x/L), ..., sin(n pi x/L)] (2n+1)
 *   CubicHermiteSpline    [p_1, s_d m_1, ..., p_n, s_d m_n]                (2n)
 *   Constant              [1]
 *   Zero                  [0]
 *   AtanPair              [1, atan x]
 *   SinPair               [1, sin x]
 *
 * The spline has n interior nodes s_1..s_n on the uniform grid
 * s_0 < s_1 < ... < s_{n+1}. The end nodes carry no basis functions, so the
 * spline and its slope vanish there.
 */

#include <Eigen/Core>

#include <string>
#include <variant>

namespace npcac {

struct Polynomial {
  int degree = 0;
};

struct Fourier {
  int harmonics = 1;
  double half_period = 1.0;
};

struct CubicHermiteSpline {
  int interior_nodes = 2;
  double domain_lo = -1.0;
  double domain_hi = 1.0;

  double spacing() const { return (domain_hi - domain_lo) / (interior_nodes + 1); }
  double node(int j) const { return domain_lo + j * spacing(); }
};

struct Constant {};
struct Zero {};

// Two-element dictionaries holding the exact nonlinearity of the benchmark
// plants; used by the baseline presets.
struct AtanPair {};
struct SinPair {};

using BasisSpec = std::variant<Polynomial, Fourier, CubicHermiteSpline, Constant, Zero, AtanPair, SinPair>;

/// Throws std::invalid_argument if the parameters are out of range.
void validate_basis(const BasisSpec& spec);

int output_dim(const BasisSpec& spec);

/// Evaluates the dictionary at x. Throws std::invalid_argument for non-finite x.
Eigen::VectorXd eval(const BasisSpec& spec, double x);

/// Writes eval(spec, x) into out, which must have length output_dim(spec).
void eval_into(const BasisSpec& spec, double x, Eigen::Ref<Eigen::VectorXd> out);

/// Short human-readable name, e.g. "fourier(n=2,L=6)".
std::string describe(const BasisSpec& spec);

}  // namespace npcac
