#ifndef N3POM_MONOTONICITY_HPP
#define N3POM_MONOTONICITY_HPP

#include "n3pom/core.hpp"

namespace n3pom {

/// Sufficient condition for f_u(x) to be non-decreasing in u on the ball
/// ||x||_2 <= eta:
///
///   min_r s_{r-1} >= eta * rho'_inf * sqrt(sum_k (sum_l |w2_kl w1_kl|)^2).
struct MonotonicityReport {
  double lhs = 0.0;  // minimum intercept slope
  double rhs = 0.0;
  bool satisfied = true;
  double c = 1.0;  // rescaling coefficient min(1, lhs / rhs)
};

inline constexpr double kConditionTolerance = 1e-12;

/// Right-hand side of the condition for a given radius.
double condition_rhs(const CoefficientNet& net, double eta);

MonotonicityReport check_condition(const Model& m);

/// Scales every w1 and w2 by sqrt(c). A model that already satisfies the
/// condition is left bit-for-bit unchanged. Returns the report computed
/// before scaling.
MonotonicityReport project(Model& m);

}  // namespace n3pom

#endif  // N3POM_MONOTONICITY_HPP
