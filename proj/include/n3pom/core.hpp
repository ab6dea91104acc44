#ifndef N3POM_CORE_HPP
#define N3POM_CORE_HPP

// Model parameters and forward evaluation of the neural-network-based
// non-proportional odds model
//
//   P(H <= u | X = x) = sigma(f_u(x)),   f_u(x) = a(u) + <b(u), x>,
//
// where a(u) is a non-decreasing piecewise-linear intercept and each
// coefficient b_k(u) is a single-hidden-layer perceptron in u.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace n3pom {

enum class Activation { sigmoid, tanh };

std::string to_string(Activation act);
Activation parse_activation(std::string_view name);

/// sup_z |rho'(z)|: 1/4 for the sigmoid, 1 for tanh.
double activation_bound(Activation act);

double activate(Activation act, double z);
double activate_d1(Activation act, double z);
double activate_d2(Activation act, double z);

/// Logistic function, evaluated without overflow for any finite z.
double sigmoid(double z);
/// sigma'(z) = sigma(z) (1 - sigma(z)).
double sigmoid_d1(double z);
/// sigma''(z) = sigma'(z) (1 - 2 sigma(z)).
double sigmoid_d2(double z);
/// log sigma'(z), accurate in the tails.
double log_sigmoid_d1(double z);

/// Piecewise-linear intercept a(u) on knots 1 = j_1 < ... < j_R = J.
///
/// Knot values are re-parameterized as alpha_1 = phi and
/// alpha_r = phi + sum_{t=2..r} |varphi_t|, so a(u) is non-decreasing for
/// every parameter value. varphi[r-2] holds varphi_r.
struct InterceptParams {
  std::vector<double> knots;
  double phi = 0.0;
  std::vector<double> varphi;

  /// R equally spaced knots on [1, j_max] with zero parameters.
  static InterceptParams equally_spaced(std::size_t num_knots, double j_max);

  std::size_t num_knots() const { return knots.size(); }
  double j_max() const { return knots.back(); }

  /// Throws ConfigError unless the knots and parameter sizes are consistent.
  void validate() const;

  /// Knot values alpha_1..alpha_R.
  std::vector<double> alphas() const;
  /// Cell slopes s_1..s_{R-1}, all non-negative.
  std::vector<double> slopes() const;

  /// Index c of the partition cell [j_{c+1}, j_{c+2}) containing u (0-based;
  /// the last cell is closed on the right). Throws DomainError outside [1, J].
  std::size_t cell_of(double u) const;
};

/// Per-covariate perceptrons b_k(u) = v2_k + sum_l w2_{kl} rho(w1_{kl} u + v1_{kl}).
/// Weight matrices are stored row-major with one row of length L per covariate.
struct CoefficientNet {
  std::size_t dim = 0;     // d
  std::size_t hidden = 0;  // L
  Activation activation = Activation::sigmoid;
  std::vector<double> w1, v1, w2;  // dim * hidden
  std::vector<double> v2;          // dim

  CoefficientNet() = default;
  CoefficientNet(std::size_t dim, std::size_t hidden, Activation act);

  std::size_t index(std::size_t k, std::size_t l) const { return k * hidden + l; }
  void validate() const;
};

struct Model {
  InterceptParams intercept;
  CoefficientNet net;
  double eta = 1.0;  // radius of the covariate ball the model is certified on

  double j_max() const { return intercept.j_max(); }
  std::size_t dim() const { return net.dim; }
  void validate() const;
};

double eval_a(const InterceptParams& p, double u);
/// Weak derivative: the slope of the cell containing u.
double eval_a_deriv(const InterceptParams& p, double u);

std::vector<double> eval_b(const CoefficientNet& net, double u);
std::vector<double> eval_b_deriv(const CoefficientNet& net, double u);
/// Non-allocating variants; out.size() must equal net.dim.
void eval_b(const CoefficientNet& net, double u, std::span<double> out);
void eval_b_deriv(const CoefficientNet& net, double u, std::span<double> out);

double eval_f(const Model& m, double u, std::span<const double> x);
/// f'_u(x) = a'(u) + <b'(u), x>.
double eval_f_deriv(const Model& m, double u, std::span<const double> x);
/// Conditional cumulative probability sigma(f_u(x)).
double eval_ccp(const Model& m, double u, std::span<const double> x);
/// Conditional density sigma'(f_u(x)) f'_u(x). Negative only for models that
/// are not monotone at x.
double eval_cpd(const Model& m, double u, std::span<const double> x);
/// d/dx P(H > u | x) = -b(u) sigma'(-f_u(x)).
std::vector<double> eval_marginal_effect(const Model& m, double u, std::span<const double> x);

}  // namespace n3pom

#endif  // N3POM_CORE_HPP
