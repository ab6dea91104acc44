#ifndef N3POM_GRADIENTS_HPP
#define N3POM_GRADIENTS_HPP

// Hand-coded gradients of f_u(x), its weak derivative f'_u(x) and the
// weighted log-likelihood
//
//   l(theta) = sum_i zeta_i { log sigma'(f_{h_i}(x_i)) + log f'_{h_i}(x_i) }
//
// with respect to every model parameter.
//
// grad_loglik and full_loglik run their per-sample loops with OpenMP and
// reduce in ascending sample order, so they are bit-identical to the
// *_serial reference versions for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "n3pom/core.hpp"
#include "n3pom/dataset.hpp"

namespace n3pom {

/// Floor applied to f'_u(x) inside log and reciprocal.
inline constexpr double kDensityFloor = 1e-12;

/// Gradient with the same shape as the model parameters.
struct ParamGradient {
  double d_phi = 0.0;
  std::vector<double> d_varphi;        // R - 1
  std::vector<double> d_w1, d_v1, d_w2;  // d * L, row-major per covariate
  std::vector<double> d_v2;            // d

  static ParamGradient zeros_like(const Model& m);

  /// Flat layout: phi, varphi, w1, v1, w2, v2.
  std::vector<double> flat() const;
  void add_scaled(const ParamGradient& other, double scale);
  void scale(double s);
  double norm() const;
  bool all_finite() const;
};

std::size_t num_params(const Model& m);
/// Model parameters in the ParamGradient::flat() layout.
std::vector<double> pack_params(const Model& m);
void unpack_params(Model& m, std::span<const double> theta);
/// theta <- theta + step * grad.
void apply_step(Model& m, const ParamGradient& grad, double step);

/// Unit truncation: 0 below 0, z on [0, 1], 1 above 1.
double clamp_unit(double z);
/// sign(0) = 0.
double sign_of(double v);

ParamGradient grad_f(const Model& m, double u, std::span<const double> x);
ParamGradient grad_f_deriv(const Model& m, double u, std::span<const double> x);

/// Sum over batch indices i of zeta[i] * grad log q(h_i | x_i). zeta is
/// indexed by dataset row. Throws NumericError naming the sample when
/// f'_{h_i}(x_i) < 0.
ParamGradient grad_loglik(const Model& m, const Dataset& data, std::span<const std::size_t> batch,
                          std::span<const double> zeta);
ParamGradient grad_loglik_serial(const Model& m, const Dataset& data, std::span<const std::size_t> batch,
                                 std::span<const double> zeta);

/// sum_i zeta_i log q(h_i | x_i) over the whole dataset, density floored.
double full_loglik(const Model& m, const Dataset& data, std::span<const double> zeta);
double full_loglik_serial(const Model& m, const Dataset& data, std::span<const double> zeta);

/// Weighted log-likelihood restricted to batch rows.
double batch_loglik(const Model& m, const Dataset& data, std::span<const std::size_t> batch,
                    std::span<const double> zeta);

}  // namespace n3pom

#endif  // N3POM_GRADIENTS_HPP
