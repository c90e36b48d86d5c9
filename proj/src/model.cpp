#include "npcac/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace npcac {

ModelStructure ModelStructure::uniform(int order, const BasisSpec& f, const BasisSpec& g,
                                       std::optional<BasisSpec> h) {
  ModelStructure s;
  s.order = order;
  s.f_specs.assign(order > 0 ? order : 0, f);
  s.g_specs.assign(order > 0 ? order : 0, g);
  s.h_spec = std::move(h);
  return s;
}

void ModelStructure::validate() const {
  if (order < 1) throw std::invalid_argument("model order must be >= 1");
  if (static_cast<int>(f_specs.size()) != order || static_cast<int>(g_specs.size()) != order)
    throw std::invalid_argument("model needs one f and one g dictionary per lag");
  for (const auto& s : f_specs) validate_basis(s);
  for (const auto& s : g_specs) validate_basis(s);
  if (h_spec) validate_basis(*h_spec);
  for (const auto& s : f_specs)
    if (output_dim(s) != f_dim()) throw std::invalid_argument("all f dictionaries must share one dimension");
  for (const auto& s : g_specs)
    if (output_dim(s) != g_dim()) throw std::invalid_argument("all g dictionaries must share one dimension");
}

CoefficientVector::CoefficientVector(const ModelStructure& structure, Eigen::VectorXd values)
    : order_(structure.order),
      f_dim_(structure.f_dim()),
      g_dim_(structure.g_dim()),
      h_dim_(structure.h_dim()),
      values_(std::move(values)) {
  if (values_.size() != structure.phi_dim())
    throw std::invalid_argument("coefficient vector has length " + std::to_string(values_.size()) +
                                ", model expects " + std::to_string(structure.phi_dim()));
}

CoefficientVector CoefficientVector::zeros(const ModelStructure& structure) {
  return CoefficientVector(structure, Eigen::VectorXd::Zero(structure.phi_dim()));
}

Eigen::VectorBlock<const Eigen::VectorXd> CoefficientVector::F(int lag) const {
  if (lag < 1 || lag > order_) throw std::out_of_range("lag out of range");
  return values_.segment((lag - 1) * f_dim_, f_dim_);
}

Eigen::VectorBlock<const Eigen::VectorXd> CoefficientVector::G(int lag) const {
  if (lag < 1 || lag > order_) throw std::out_of_range("lag out of range");
  return values_.segment(order_ * f_dim_ + (lag - 1) * g_dim_, g_dim_);
}

Eigen::VectorBlock<const Eigen::VectorXd> CoefficientVector::H() const {
  return values_.segment(order_ * (f_dim_ + g_dim_), h_dim_);
}

CoefficientVector CoefficientVector::concat(const ModelStructure& structure, const std::vector<Eigen::VectorXd>& f,
                                            const std::vector<Eigen::VectorXd>& g, const Eigen::VectorXd& h) {
  Eigen::VectorXd v(structure.phi_dim());
  Eigen::Index at = 0;
  auto put = [&](const Eigen::VectorXd& part) {
    if (at + part.size() > v.size()) throw std::invalid_argument("coefficient slices too long");
    v.segment(at, part.size()) = part;
    at += part.size();
  };
  for (const auto& p : f) put(p);
  for (const auto& p : g) put(p);
  put(h);
  if (at != v.size()) throw std::invalid_argument("coefficient slices too short");
  return CoefficientVector(structure, std::move(v));
}

History::History(int depth, long first_step)
    : depth_(depth), first_(first_step), latest_(first_step - 1), ys_(depth, 0.0), us_(depth, 0.0) {
  if (depth < 1) throw std::invalid_argument("history depth must be >= 1");
}

void History::push(double y, double u) {
  ++latest_;
  const auto slot = static_cast<std::size_t>(((latest_ % depth_) + depth_) % depth_);
  ys_[slot] = y;
  us_[slot] = u;
}

void History::set_latest_y(double y) {
  if (latest_ < first_) throw std::logic_error("history is empty");
  ys_[static_cast<std::size_t>(((latest_ % depth_) + depth_) % depth_)] = y;
}

bool History::covers(long oldest_step) const { return std::max(oldest_step, first_) > latest_ - depth_; }

double History::y(long step) const {
  if (step > latest_) throw std::out_of_range("output at step " + std::to_string(step) + " not recorded yet");
  if (step < first_) return 0.0;
  if (!covers(step)) throw std::out_of_range("output at step " + std::to_string(step) + " fell out of the history");
  return ys_[static_cast<std::size_t>(((step % depth_) + depth_) % depth_)];
}

double History::u(long step) const {
  if (step > latest_) throw std::out_of_range("input at step " + std::to_string(step) + " not recorded yet");
  if (step < first_) return 0.0;
  if (!covers(step)) throw std::out_of_range("input at step " + std::to_string(step) + " fell out of the history");
  return us_[static_cast<std::size_t>(((step % depth_) + depth_) % depth_)];
}

Eigen::VectorXd regressor(const ModelStructure& structure, std::span<const double> y_lags,
                          std::span<const double> u_lags) {
  const int n = structure.order;
  if (static_cast<int>(y_lags.size()) < n || static_cast<int>(u_lags.size()) < n)
    throw std::invalid_argument("insufficient history for regressor");

  const int lf = structure.f_dim();
  const int lg = structure.g_dim();
  Eigen::VectorXd phi(structure.phi_dim());
  for (int i = 0; i < n; ++i) {
    auto fseg = phi.segment(i * lf, lf);
    eval_into(structure.f_specs[i], y_lags[i], fseg);
    fseg *= -y_lags[i];
    auto gseg = phi.segment(n * lf + i * lg, lg);
    eval_into(structure.g_specs[i], y_lags[i], gseg);
    gseg *= u_lags[i];
  }
  if (structure.h_spec) eval_into(*structure.h_spec, y_lags[0], phi.tail(structure.h_dim()));
  return phi;
}

Eigen::VectorXd regressor(const ModelStructure& structure, const History& hist, long k) {
  const int n = structure.order;
  if (!hist.covers(k - n) || hist.latest() < k - 1) throw std::out_of_range("insufficient history for regressor");
  std::vector<double> ys(n), us(n);
  for (int i = 1; i <= n; ++i) {
    ys[i - 1] = hist.y(k - i);
    us[i - 1] = hist.u(k - i);
  }
  return regressor(structure, ys, us);
}

double predict(const CoefficientVector& theta, const Eigen::VectorXd& phi) {
  if (theta.size() != phi.size()) throw std::invalid_argument("theta and phi lengths differ");
  return theta.values().dot(phi);
}

double prediction_error(const CoefficientVector& theta, const Eigen::VectorXd& phi, double y) {
  return y - predict(theta, phi);
}

double eval_Fhat(const ModelStructure& structure, const CoefficientVector& theta, int lag, double window_lead) {
  if (lag < 1 || lag > structure.order) throw std::out_of_range("lag out of range");
  return theta.F(lag).dot(eval(structure.f_specs[lag - 1], window_lead));
}

double eval_Ghat(const ModelStructure& structure, const CoefficientVector& theta, int lag, double window_lead) {
  if (lag < 1 || lag > structure.order) throw std::out_of_range("lag out of range");
  return theta.G(lag).dot(eval(structure.g_specs[lag - 1], window_lead));
}

double eval_Hterm(const ModelStructure& structure, const CoefficientVector& theta, double window_lead) {
  if (!structure.h_spec) return 0.0;
  return theta.H().dot(eval(*structure.h_spec, window_lead));
}

}  // namespace npcac
