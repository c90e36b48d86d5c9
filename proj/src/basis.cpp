#include "npcac/basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace npcac {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Hermite pieces on the unit interval. "rise" is the half of node i supported
// on [s_{i-1}, s_i), "fall" the half on [s_i, s_{i+1}).
inline double p_rise(double t) { return t * t * (3.0 - 2.0 * t); }
inline double m_rise(double t) { return t * t * (t - 1.0); }
inline double p_fall(double t) { return 1.0 - t * t * (3.0 - 2.0 * t); }
inline double m_fall(double t) { return t * (1.0 - t) * (1.0 - t); }

void eval_spline(const CubicHermiteSpline& s, double x, Eigen::Ref<Eigen::VectorXd> out) {
  out.setZero();
  const double sd = s.spacing();
  if (x < s.domain_lo || x >= s.domain_hi) return;

  // x lies in [s_j, s_{j+1}); floor can be off by one at the node boundaries
  int j = static_cast<int>(std::floor((x - s.domain_lo) / sd));
  if (j > s.interior_nodes) j = s.interior_nodes;
  if (j < 0) j = 0;
  while (j > 0 && x < s.node(j)) --j;
  while (j < s.interior_nodes && x >= s.node(j + 1)) ++j;

  const double t = (x - s.node(j)) / sd;
  if (j >= 1) {  // falling half of node j
    out[2 * (j - 1)] = p_fall(t);
    out[2 * (j - 1) + 1] = sd * m_fall(t);
  }
  if (j + 1 <= s.interior_nodes) {  // rising half of node j+1
    out[2 * j] = p_rise(t);
    out[2 * j + 1] = sd * m_rise(t);
  }
}

}  // namespace

void validate_basis(const BasisSpec& spec) {
  std::visit(overloaded{
                 [](const Polynomial& p) {
                   if (p.degree < 0) throw std::invalid_argument("polynomial degree must be >= 0");
                 },
                 [](const Fourier& f) {
                   if (f.harmonics < 1) throw std::invalid_argument("fourier harmonics must be >= 1");
                   if (!(f.half_period > 0.0) || !std::isfinite(f.half_period))
                     throw std::invalid_argument("fourier half period must be positive");
                 },
                 [](const CubicHermiteSpline& s) {
                   if (s.interior_nodes < 2) throw std::invalid_argument("spline needs at least 2 interior nodes");
                   if (!std::isfinite(s.domain_lo) || !std::isfinite(s.domain_hi) || !(s.domain_lo < s.domain_hi))
                     throw std::invalid_argument("spline domain must satisfy lo < hi");
                 },
                 [](const auto&) {},
             },
             spec);
}

int output_dim(const BasisSpec& spec) {
  return std::visit(overloaded{
                        [](const Polynomial& p) { return p.degree + 1; },
                        [](const Fourier& f) { return 2 * f.harmonics + 1; },
                        [](const CubicHermiteSpline& s) { return 2 * s.interior_nodes; },
                        [](const Constant&) { return 1; },
                        [](const Zero&) { return 1; },
                        [](const AtanPair&) { return 2; },
                        [](const SinPair&) { return 2; },
                    },
                    spec);
}

void eval_into(const BasisSpec& spec, double x, Eigen::Ref<Eigen::VectorXd> out) {
  if (!std::isfinite(x)) throw std::invalid_argument("basis argument must be finite");
  if (out.size() != output_dim(spec)) throw std::invalid_argument("basis output has wrong length");

  std::visit(overloaded{
                 [&](const Polynomial& p) {
                   double v = 1.0;
                   for (int i = 0; i <= p.degree; ++i) {
                     out[i] = v;
                     v *= x;
                   }
                 },
                 [&](const Fourier& f) {
                   out[0] = 1.0;
                   const double w = std::numbers::pi * x / f.half_period;
                   for (int i = 1; i <= f.harmonics; ++i) {
                     out[2 * i - 1] = std::cos(i * w);
                     out[2 * i] = std::sin(i * w);
                   }
                 },
                 [&](const CubicHermiteSpline& s) { eval_spline(s, x, out); },
                 [&](const Constant&) { out[0] = 1.0; },
                 [&](const Zero&) { out[0] = 0.0; },
                 [&](const AtanPair&) {
                   out[0] = 1.0;
                   out[1] = std::atan(x);
                 },
                 [&](const SinPair&) {
                   out[0] = 1.0;
                   out[1] = std::sin(x);
                 },
             },
             spec);
}

Eigen::VectorXd eval(const BasisSpec& spec, double x) {
  Eigen::VectorXd out(output_dim(spec));
  eval_into(spec, x, out);
  return out;
}

std::string describe(const BasisSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Polynomial& p) { os << "polynomial(n=" << p.degree << ")"; },
                 [&](const Fourier& f) { os << "fourier(n=" << f.harmonics << ",L=" << f.half_period << ")"; },
                 [&](const CubicHermiteSpline& s) {
                   os << "spline(n=" << s.interior_nodes << ",lo=" << s.domain_lo << ",hi=" << s.domain_hi << ")";
                 },
                 [&](const Constant&) { os << "constant"; },
                 [&](const Zero&) { os << "zero"; },
                 [&](const AtanPair&) { os << "atan"; },
                 [&](const SinPair&) { os << "sin"; },
             },
             spec);
  return os.str();
}

}  // namespace npcac
