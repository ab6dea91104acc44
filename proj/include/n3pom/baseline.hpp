#ifndef N3POM_BASELINE_HPP
#define N3POM_BASELINE_HPP

// Discrete cumulative-logit baselines and the distillation initializer that
// maps their threshold coefficients onto the coefficient network.
//
//   P(G <= j | x) = sigma(alpha_j + <beta_j, x>),  j = 1..J-1.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "n3pom/core.hpp"
#include "n3pom/dataset.hpp"

namespace n3pom {

struct DiscreteFit {
  std::vector<double> alphas;              // J - 1, non-decreasing
  std::vector<std::vector<double>> betas;  // J - 1 rows of length d
  double penalty_lambda = 0.0;
  bool proportional = false;
  std::size_t iterations = 0;
  bool converged = false;
  double loglik = 0.0;  // unpenalized, summed over samples

  std::size_t num_classes() const { return alphas.size() + 1; }
  std::size_t dim() const { return betas.empty() ? 0 : betas.front().size(); }
};

struct DiscreteFitOptions {
  bool proportional = false;
  /// Weight of the adjacent-threshold penalty lambda * sum_j ||beta_{j+1} - beta_j||^2.
  double lambda = 10.0;
  std::size_t max_iterations = 50000;
  double tolerance = 1e-6;  // on the sup-norm of the per-sample gradient
};

/// Maximum (penalized) likelihood for responses in {1..num_classes}.
/// Intercepts are kept ordered through alpha_j = phi + sum_{t<=j} |phi_t|.
DiscreteFit fit_discrete(const Dataset& data, std::size_t num_classes, const DiscreteFitOptions& opts = {});

/// fit_discrete over the observed range of classes when the lowest or highest
/// classes are empty; their thresholds are continued linearly from the two
/// nearest fitted ones. Needs at least three observed classes.
DiscreteFit fit_discrete_observed(const Dataset& data, std::size_t num_classes, const DiscreteFitOptions& opts = {});

/// Log-likelihood of the discrete model; -inf if any class probability <= 0.
double discrete_loglik(const DiscreteFit& fit, const Dataset& data);

/// beta_1..beta_J with beta_J = 2 beta_{J-1} - beta_{J-2}.
std::vector<std::vector<double>> extend_betas(const DiscreteFit& fit);

/// Linear interpolation of the extended coefficients at response level u.
std::vector<double> interpolate_betas(const std::vector<std::vector<double>>& betas, double u);

/// Sigmoid network with b_k(j) ~= beta_{jk} at j = 1..J, built from J
/// step-like units of steepness `sharpness`. With `duplicate`, each unit's
/// output weight is split evenly over floor(L / J) identical copies.
CoefficientNet distill_coefficients(const std::vector<std::vector<double>>& betas, std::size_t hidden,
                                    double sharpness, bool duplicate);

/// Intercept whose knot values linearly interpolate alpha_1..alpha_{J-1}
/// placed at u = 1..J-1 (continued linearly up to J).
InterceptParams intercept_from_alphas(const std::vector<double>& alphas, std::size_t num_knots);

struct DistillOptions {
  std::size_t hidden = 50;
  double sharpness = 10.0;
  std::size_t num_knots = 24;
  double eta = 1.0;
  std::uint64_t seed = 0;
  /// Multiplier on the unit-normal noise given to unused output weights.
  double w2_noise_scale = 1.0;
  /// tanh networks are obtained from the sigmoid construction through
  /// sigma(z) = (1 + tanh(z / 2)) / 2, before noise is added.
  Activation activation = Activation::sigmoid;
};

/// The same function written with tanh units.
CoefficientNet sigmoid_to_tanh(const CoefficientNet& net);

/// Distilled model; unused units receive i.i.d. standard normal weights.
/// Requires hidden > J.
Model init_from_discrete(const DiscreteFit& fit, const DistillOptions& opts);

/// Small-normal initialization (scale 0.1) with an identity-like intercept.
Model init_random(std::size_t dim, double j_max, std::size_t num_knots, std::size_t hidden, Activation act,
                  double eta, std::uint64_t seed);

}  // namespace n3pom

#endif  // N3POM_BASELINE_HPP
