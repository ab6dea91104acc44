#include "n3pom/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "n3pom/errors.hpp"
#include "n3pom/gradients.hpp"
#include "n3pom/rng.hpp"

namespace n3pom {

namespace {

double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

// Parameter layout: phi, phi_2..phi_K, then beta (d entries when
// proportional, K * d otherwise).
class DiscreteProblem {
 public:
  DiscreteProblem(const Dataset& data, std::size_t num_classes, const DiscreteFitOptions& opts)
      : data_(data), K_(num_classes - 1), d_(data.dim), opts_(opts) {
    classes_.reserve(data.size());
    for (double h : data.h) {
      const double r = std::round(h);
      if (r != h || r < 1.0 || r > static_cast<double>(num_classes)) {
        std::ostringstream msg;
        msg << "discrete fit needs integer responses in {1.." << num_classes << "}, got " << h;
        throw ConfigError(msg.str());
      }
      classes_.push_back(static_cast<std::size_t>(r));
    }
  }

  std::size_t size() const { return K_ + (opts_.proportional ? d_ : K_ * d_); }

  std::vector<double> alphas(const std::vector<double>& theta) const {
    std::vector<double> a(K_);
    a[0] = theta[0];
    for (std::size_t j = 1; j < K_; ++j) a[j] = a[j - 1] + std::fabs(theta[j]);
    return a;
  }

  const double* beta(const std::vector<double>& theta, std::size_t j) const {
    return theta.data() + K_ + (opts_.proportional ? 0 : j * d_);
  }

  double penalty(const std::vector<double>& theta) const {
    if (opts_.proportional || opts_.lambda == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < K_; ++j) {
      const double* b0 = beta(theta, j);
      const double* b1 = beta(theta, j + 1);
      for (std::size_t k = 0; k < d_; ++k) acc += (b1[k] - b0[k]) * (b1[k] - b0[k]);
    }
    return opts_.lambda * acc;
  }

  // Per-sample log-likelihood sum; optionally accumulates d/d(eta_j) terms.
  double loglik(const std::vector<double>& theta, std::vector<double>* d_alpha, std::vector<double>* d_beta) const {
    const auto a = alphas(theta);
    double total = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto x = data_.row(i);
      const std::size_t g = classes_[i];
      auto lin = [&](std::size_t j) {
        const double* b = beta(theta, j);
        double acc = a[j];
        for (std::size_t k = 0; k < d_; ++k) acc += b[k] * x[k];
        return acc;
      };
      double ll = 0.0, d_upper = 0.0, d_lower = 0.0;
      if (g == 1) {
        const double e = lin(0);
        ll = log_sigmoid(e);
        d_upper = sigmoid(-e);
      } else if (g == K_ + 1) {
        const double e = lin(K_ - 1);
        ll = log_sigmoid(-e);
        d_lower = -sigmoid(e);
      } else {
        const double eu = lin(g - 1), el = lin(g - 2);
        const double p = sigmoid(eu) - sigmoid(el);
        if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
        ll = std::log(p);
        d_upper = sigmoid_d1(eu) / p;
        d_lower = -sigmoid_d1(el) / p;
      }
      total += ll;
      if (d_alpha != nullptr) {
        auto push = [&](std::size_t j, double w) {
          (*d_alpha)[j] += w;
          double* db = d_beta->data() + (opts_.proportional ? 0 : j * d_);
          for (std::size_t k = 0; k < d_; ++k) db[k] += w * x[k];
        };
        if (g <= K_) push(g - 1, d_upper);
        if (g >= 2) push(g - 2, d_lower);
      }
    }
    return total;
  }

  double objective(const std::vector<double>& theta) const {
    return (loglik(theta, nullptr, nullptr) - penalty(theta)) / static_cast<double>(data_.size());
  }

  double objective_grad(const std::vector<double>& theta, std::vector<double>& grad) const {
    std::vector<double> d_alpha(K_, 0.0);
    std::vector<double> d_beta(opts_.proportional ? d_ : K_ * d_, 0.0);
    const double ll = loglik(theta, &d_alpha, &d_beta);
    const double n = static_cast<double>(data_.size());
    grad.assign(size(), 0.0);
    // alpha_j = phi + sum_{t=1..j} |phi_t|
    double tail = 0.0;
    for (std::size_t j = K_; j-- > 1;) {
      tail += d_alpha[j];
      grad[j] = sign_of(theta[j]) * tail / n;
    }
    grad[0] = (tail + d_alpha[0]) / n;
    for (std::size_t i = 0; i < d_beta.size(); ++i) grad[K_ + i] = d_beta[i] / n;
    if (!opts_.proportional && opts_.lambda != 0.0) {
      for (std::size_t j = 0; j + 1 < K_; ++j) {
        for (std::size_t k = 0; k < d_; ++k) {
          const double diff = beta(theta, j + 1)[k] - beta(theta, j)[k];
          grad[K_ + (j + 1) * d_ + k] -= 2.0 * opts_.lambda * diff / n;
          grad[K_ + j * d_ + k] += 2.0 * opts_.lambda * diff / n;
        }
      }
    }
    return (ll - penalty(theta)) / n;
  }

  std::vector<double> initial(std::size_t num_classes) const {
    std::vector<double> counts(num_classes, 0.0);
    for (std::size_t g : classes_) counts[g - 1] += 1.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (counts[c] == 0.0) {
        std::ostringstream msg;
        msg << "class " << c + 1 << " has no observations";
        throw ConfigError(msg.str());
      }
    }
    std::vector<double> theta(size(), 0.0);
    const double n = static_cast<double>(classes_.size());
    double cum = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < K_; ++j) {
      cum += counts[j];
      const double p = cum / n;
      const double logit = std::log(p) - std::log1p(-p);
      theta[j] = j == 0 ? logit : logit - prev;
      prev = logit;
    }
    return theta;
  }

  DiscreteFit to_fit(const std::vector<double>& theta) const {
    DiscreteFit fit;
    fit.alphas = alphas(theta);
    fit.betas.resize(K_);
    for (std::size_t j = 0; j < K_; ++j) fit.betas[j].assign(beta(theta, j), beta(theta, j) + d_);
    fit.proportional = opts_.proportional;
    fit.penalty_lambda = opts_.proportional ? 0.0 : opts_.lambda;
    fit.loglik = loglik(theta, nullptr, nullptr);
    return fit;
  }

 private:
  const Dataset& data_;
  std::size_t K_, d_;
  DiscreteFitOptions opts_;
  std::vector<std::size_t> classes_;
};

}  // namespace

DiscreteFit fit_discrete(const Dataset& data, std::size_t num_classes, const DiscreteFitOptions& opts) {
  if (num_classes < 2) throw ConfigError("discrete fit needs at least two classes");
  if (opts.lambda < 0.0) throw ConfigError("penalty weight must be non-negative");
  if (data.size() == 0) throw ConfigError("discrete fit needs data");
  DiscreteProblem prob(data, num_classes, opts);
  std::vector<double> theta = prob.initial(num_classes);
  std::vector<double> grad, trial(theta.size());

  double value = prob.objective_grad(theta, grad);
  if (!std::isfinite(value)) throw NumericError("discrete fit: non-finite likelihood at the starting point");

  double step = 1.0;
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < opts.max_iterations; ++iter) {
    double sup = 0.0;
    for (double g : grad) sup = std::max(sup, std::fabs(g));
    if (sup < opts.tolerance) {
      converged = true;
      break;
    }
    bool moved = false;
    while (step > 1e-30) {
      for (std::size_t i = 0; i < theta.size(); ++i) trial[i] = theta[i] + step * grad[i];
      const double v = prob.objective(trial);
      if (std::isfinite(v) && v >= value) {
        theta.swap(trial);
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // no ascent direction left at machine precision
    value = prob.objective_grad(theta, grad);
  }

  DiscreteFit fit = prob.to_fit(theta);
  fit.iterations = iter;
  fit.converged = converged;
  return fit;
}

DiscreteFit fit_discrete_observed(const Dataset& data, std::size_t num_classes, const DiscreteFitOptions& opts) {
  if (data.size() == 0) throw ConfigError("discrete fit needs data");
  const auto [lo_it, hi_it] = std::minmax_element(data.h.begin(), data.h.end());
  const double lo = std::max(1.0, *lo_it), hi = std::min(static_cast<double>(num_classes), *hi_it);
  if (lo == 1.0 && hi == static_cast<double>(num_classes)) return fit_discrete(data, num_classes, opts);
  const auto first = static_cast<std::size_t>(lo), last = static_cast<std::size_t>(hi);
  if (last < first + 2) throw ConfigError("too few observed classes to continue the end thresholds");

  std::vector<double> shifted(data.h);
  for (double& h : shifted) h -= lo - 1.0;
  const DiscreteFit inner = fit_discrete(data.with_responses(std::move(shifted)), last - first + 1, opts);

  const std::size_t K = inner.alphas.size();
  auto at = [&](double t, auto get) {
    // threshold position t in inner coordinates, continued linearly past either end
    if (t < 0.0) return get(0) + t * (get(1) - get(0));
    if (t > static_cast<double>(K - 1)) return get(K - 1) + (t - static_cast<double>(K - 1)) * (get(K - 1) - get(K - 2));
    return get(static_cast<std::size_t>(t));
  };
  DiscreteFit out = inner;
  out.alphas.assign(num_classes - 1, 0.0);
  out.betas.assign(num_classes - 1, std::vector<double>(inner.dim(), 0.0));
  for (std::size_t j = 1; j < num_classes; ++j) {
    const double t = static_cast<double>(j) - lo;
    out.alphas[j - 1] = at(t, [&](std::size_t i) { return inner.alphas[i]; });
    for (std::size_t k = 0; k < inner.dim(); ++k) out.betas[j - 1][k] = at(t, [&](std::size_t i) { return inner.betas[i][k]; });
  }
  return out;
}

double discrete_loglik(const DiscreteFit& fit, const Dataset& data) {
  const std::size_t K = fit.alphas.size();
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const auto g = static_cast<std::size_t>(std::lround(data.h[i]));
    auto cdf = [&](std::size_t c) {  // P(G <= c)
      if (c == 0) return 0.0;
      if (c > K) return 1.0;
      double e = fit.alphas[c - 1];
      for (std::size_t k = 0; k < x.size(); ++k) e += fit.betas[c - 1][k] * x[k];
      return sigmoid(e);
    };
    const double p = cdf(g) - cdf(g - 1);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
  }
  return total;
}

std::vector<std::vector<double>> extend_betas(const DiscreteFit& fit) {
  std::vector<std::vector<double>> out = fit.betas;
  const std::size_t K = out.size();
  std::vector<double> last = out.back();
  if (K >= 2)
    for (std::size_t k = 0; k < last.size(); ++k) last[k] = 2.0 * out[K - 1][k] - out[K - 2][k];
  out.push_back(std::move(last));
  return out;
}

std::vector<double> interpolate_betas(const std::vector<std::vector<double>>& betas, double u) {
  const double J = static_cast<double>(betas.size());
  const double t = std::clamp(u, 1.0, J);
  const auto lo = std::min(static_cast<std::size_t>(std::floor(t)), betas.size() - 1);  // 1-based lower level
  const double w = t - static_cast<double>(lo);
  std::vector<double> out(betas.front().size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double b0 = betas[lo - 1][k];
    const double b1 = lo < betas.size() ? betas[lo][k] : b0;
    out[k] = b0 + w * (b1 - b0);
  }
  return out;
}

CoefficientNet distill_coefficients(const std::vector<std::vector<double>>& betas, std::size_t hidden,
                                    double sharpness, bool duplicate) {
  const std::size_t J = betas.size();
  const std::size_t d = betas.front().size();
  if (hidden <= J) {
    std::ostringstream msg;
    msg << "distillation needs more hidden units than classes (L = " << hidden << ", J = " << J << ")";
    throw ConfigError(msg.str());
  }
  const std::size_t copies = duplicate ? hidden / J : 1;
  CoefficientNet net(d, hidden, Activation::sigmoid);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto& b : betas) mean += b[k];
    mean /= static_cast<double>(J);
    net.v2[k] = mean;
    // Unit l (1-based) switches on at u = l; rho(0) = 1/2 at its own level.
    double partial = 0.0;
    for (std::size_t l = 1; l <= J; ++l) {
      const double w2 = (betas[l - 1][k] - mean - partial) / 0.5;
      partial += w2;
      for (std::size_t c = 0; c < copies; ++c) {
        const std::size_t i = net.index(k, c * J + (l - 1));
        net.w1[i] = sharpness;
        net.v1[i] = -sharpness * static_cast<double>(l);
        net.w2[i] = w2 / static_cast<double>(copies);
      }
    }
  }
  return net;
}

InterceptParams intercept_from_alphas(const std::vector<double>& alphas, std::size_t num_knots) {
  const std::size_t K = alphas.size();
  const double J = static_cast<double>(K + 1);
  std::vector<double> levels = alphas;
  levels.push_back(K >= 2 ? 2.0 * alphas[K - 1] - alphas[K - 2] : alphas[K - 1] + 1.0);
  // levels[j-1] sits at u = j, j = 1..J; non-decreasing by construction.
  InterceptParams p = InterceptParams::equally_spaced(num_knots, J);
  auto value_at = [&](double u) {
    const auto lo = std::min(static_cast<std::size_t>(std::floor(u)), K);
    const double w = u - static_cast<double>(lo);
    return levels[lo - 1] + w * (lo < K + 1 ? levels[lo] - levels[lo - 1] : 0.0);
  };
  double prev = value_at(p.knots[0]);
  p.phi = prev;
  for (std::size_t r = 1; r < num_knots; ++r) {
    const double v = value_at(p.knots[r]);
    p.varphi[r - 1] = std::max(v - prev, 0.0);
    prev = std::max(v, prev);
  }
  return p;
}

CoefficientNet sigmoid_to_tanh(const CoefficientNet& net) {
  if (net.activation != Activation::sigmoid) throw ConfigError("sigmoid_to_tanh: network is not sigmoid");
  CoefficientNet out = net;
  out.activation = Activation::tanh;
  for (std::size_t k = 0; k < net.dim; ++k) {
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      out.w1[i] = 0.5 * net.w1[i];
      out.v1[i] = 0.5 * net.v1[i];
      out.w2[i] = 0.5 * net.w2[i];
      out.v2[k] += 0.5 * net.w2[i];
    }
  }
  return out;
}

Model init_from_discrete(const DiscreteFit& fit, const DistillOptions& opts) {
  const auto betas = extend_betas(fit);
  Model m;
  m.net = distill_coefficients(betas, opts.hidden, opts.sharpness, /*duplicate=*/true);
  if (opts.activation == Activation::tanh) m.net = sigmoid_to_tanh(m.net);
  m.intercept = intercept_from_alphas(fit.alphas, opts.num_knots);
  m.eta = opts.eta;

  const std::size_t used = (opts.hidden / betas.size()) * betas.size();
  CounterRng rng(opts.seed, 0x1417);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < m.net.dim; ++k) {
    for (std::size_t l = used; l < opts.hidden; ++l) {
      const std::size_t i = m.net.index(k, l);
      m.net.w1[i] += normal(rng);
      m.net.v1[i] += normal(rng);
      m.net.w2[i] += opts.w2_noise_scale * normal(rng);
    }
  }
  return m;
}

Model init_random(std::size_t dim, double j_max, std::size_t num_knots, std::size_t hidden, Activation act,
                  double eta, std::uint64_t seed) {
  Model m;
  m.intercept = InterceptParams::equally_spaced(num_knots, j_max);
  // a(u) = u - (1 + J) / 2: unit slope centred on the response range.
  m.intercept.phi = 1.0 - 0.5 * (1.0 + j_max);
  for (std::size_t r = 1; r < num_knots; ++r) m.intercept.varphi[r - 1] = m.intercept.knots[r] - m.intercept.knots[r - 1];
  m.net = CoefficientNet(dim, hidden, act);
  m.eta = eta;
  CounterRng rng(seed, 0x2a);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (auto* v : {&m.net.w1, &m.net.v1, &m.net.w2, &m.net.v2})
    for (double& e : *v) e = normal(rng);
  return m;
}

}  // namespace n3pom
