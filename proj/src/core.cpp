#include "n3pom/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "n3pom/errors.hpp"

namespace n3pom {

std::string to_string(Activation act) {
  return act == Activation::sigmoid ? "sigmoid" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected sigmoid or tanh)");
}

double activation_bound(Activation act) { return act == Activation::sigmoid ? 0.25 : 1.0; }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_d1(double z) { return sigmoid(z) * sigmoid(-z); }

double sigmoid_d2(double z) { return sigmoid_d1(z) * (1.0 - 2.0 * sigmoid(z)); }

double log_sigmoid_d1(double z) {
  const double a = std::fabs(z);
  return -a - 2.0 * std::log1p(std::exp(-a));
}

double activate(Activation act, double z) {
  return act == Activation::sigmoid ? sigmoid(z) : std::tanh(z);
}

double activate_d1(Activation act, double z) {
  if (act == Activation::sigmoid) return sigmoid_d1(z);
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

double activate_d2(Activation act, double z) {
  if (act == Activation::sigmoid) return sigmoid_d2(z);
  const double t = std::tanh(z);
  return -2.0 * t * (1.0 - t * t);
}

// ---------------------------------------------------------------------------
// Intercept

InterceptParams InterceptParams::equally_spaced(std::size_t num_knots, double j_max) {
  if (num_knots < 2) throw ConfigError("at least two knots are required");
  if (!(j_max > 1.0)) throw ConfigError("j_max must exceed 1");
  InterceptParams p;
  p.knots.resize(num_knots);
  const double step = (j_max - 1.0) / static_cast<double>(num_knots - 1);
  for (std::size_t r = 0; r < num_knots; ++r) p.knots[r] = 1.0 + step * static_cast<double>(r);
  p.knots.back() = j_max;
  p.varphi.assign(num_knots - 1, 0.0);
  return p;
}

void InterceptParams::validate() const {
  if (knots.size() < 2) throw ConfigError("intercept needs at least two knots");
  if (knots.front() != 1.0) throw ConfigError("first knot must equal 1");
  for (std::size_t r = 1; r < knots.size(); ++r) {
    if (!(knots[r] > knots[r - 1])) throw ConfigError("knots must be strictly increasing");
  }
  if (varphi.size() + 1 != knots.size()) throw ConfigError("varphi must have R-1 entries");
  if (!std::isfinite(phi) || !std::all_of(varphi.begin(), varphi.end(), [](double v) { return std::isfinite(v); }))
    throw ConfigError("intercept parameters must be finite");
}

std::vector<double> InterceptParams::alphas() const {
  std::vector<double> out(knots.size());
  out[0] = phi;
  for (std::size_t r = 1; r < knots.size(); ++r) out[r] = out[r - 1] + std::fabs(varphi[r - 1]);
  return out;
}

std::vector<double> InterceptParams::slopes() const {
  std::vector<double> out(knots.size() - 1);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::fabs(varphi[c]) / (knots[c + 1] - knots[c]);
  return out;
}

std::size_t InterceptParams::cell_of(double u) const {
  if (!(u >= knots.front() && u <= knots.back())) {
    std::ostringstream msg;
    msg << "u = " << u << " outside [" << knots.front() << ", " << knots.back() << "]";
    throw DomainError(msg.str());
  }
  const auto it = std::upper_bound(knots.begin(), knots.end(), u);
  const auto c = static_cast<std::size_t>(it - knots.begin()) - 1;
  return std::min(c, knots.size() - 2);
}

double eval_a(const InterceptParams& p, double u) {
  const std::size_t c = p.cell_of(u);
  double alpha = p.phi;
  for (std::size_t t = 0; t < c; ++t) alpha += std::fabs(p.varphi[t]);
  if (u == p.knots.back()) return alpha + std::fabs(p.varphi[c]);
  const double inc = std::fabs(p.varphi[c]);
  return alpha + inc * (u - p.knots[c]) / (p.knots[c + 1] - p.knots[c]);
}

double eval_a_deriv(const InterceptParams& p, double u) {
  const std::size_t c = p.cell_of(u);
  return std::fabs(p.varphi[c]) / (p.knots[c + 1] - p.knots[c]);
}

// ---------------------------------------------------------------------------
// Coefficient network

CoefficientNet::CoefficientNet(std::size_t dim_, std::size_t hidden_, Activation act)
    : dim(dim_),
      hidden(hidden_),
      activation(act),
      w1(dim_ * hidden_, 0.0),
      v1(dim_ * hidden_, 0.0),
      w2(dim_ * hidden_, 0.0),
      v2(dim_, 0.0) {}

void CoefficientNet::validate() const {
  if (hidden < 1) throw ConfigError("hidden layer needs at least one unit");
  const std::size_t n = dim * hidden;
  if (w1.size() != n || v1.size() != n || w2.size() != n || v2.size() != dim)
    throw ConfigError("coefficient network weight shapes are inconsistent");
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(w1) || !finite(v1) || !finite(w2) || !finite(v2))
    throw ConfigError("coefficient network weights must be finite");
}

void Model::validate() const {
  intercept.validate();
  net.validate();
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
}

void eval_b(const CoefficientNet& net, double u, std::span<double> out) {
  for (std::size_t k = 0; k < net.dim; ++k) {
    double acc = net.v2[k];
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      acc += net.w2[i] * activate(net.activation, net.w1[i] * u + net.v1[i]);
    }
    out[k] = acc;
  }
}

void eval_b_deriv(const CoefficientNet& net, double u, std::span<double> out) {
  for (std::size_t k = 0; k < net.dim; ++k) {
    double acc = 0.0;
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      acc += net.w1[i] * net.w2[i] * activate_d1(net.activation, net.w1[i] * u + net.v1[i]);
    }
    out[k] = acc;
  }
}

std::vector<double> eval_b(const CoefficientNet& net, double u) {
  std::vector<double> out(net.dim);
  eval_b(net, u, out);
  return out;
}

std::vector<double> eval_b_deriv(const CoefficientNet& net, double u) {
  std::vector<double> out(net.dim);
  eval_b_deriv(net, u, out);
  return out;
}

namespace {

void check_dim(const Model& m, std::span<const double> x) {
  if (x.size() != m.net.dim) {
    std::ostringstream msg;
    msg << "covariate vector has " << x.size() << " entries, model expects " << m.net.dim;
    throw DomainError(msg.str());
  }
}

double dot_b(const CoefficientNet& net, double u, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t k = 0; k < net.dim; ++k) {
    double bk = net.v2[k];
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      bk += net.w2[i] * activate(net.activation, net.w1[i] * u + net.v1[i]);
    }
    acc += bk * x[k];
  }
  return acc;
}

double dot_b_deriv(const CoefficientNet& net, double u, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t k = 0; k < net.dim; ++k) {
    double bk = 0.0;
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      bk += net.w1[i] * net.w2[i] * activate_d1(net.activation, net.w1[i] * u + net.v1[i]);
    }
    acc += bk * x[k];
  }
  return acc;
}

}  // namespace

double eval_f(const Model& m, double u, std::span<const double> x) {
  check_dim(m, x);
  return eval_a(m.intercept, u) + dot_b(m.net, u, x);
}

double eval_f_deriv(const Model& m, double u, std::span<const double> x) {
  check_dim(m, x);
  return eval_a_deriv(m.intercept, u) + dot_b_deriv(m.net, u, x);
}

double eval_ccp(const Model& m, double u, std::span<const double> x) { return sigmoid(eval_f(m, u, x)); }

double eval_cpd(const Model& m, double u, std::span<const double> x) {
  return sigmoid_d1(eval_f(m, u, x)) * eval_f_deriv(m, u, x);
}

std::vector<double> eval_marginal_effect(const Model& m, double u, std::span<const double> x) {
  const double scale = sigmoid_d1(-eval_f(m, u, x));
  std::vector<double> b = eval_b(m.net, u);
  for (double& v : b) v = -v * scale;
  return b;
}

}  // namespace n3pom
