#include "n3pom/monotonicity.hpp"

#include <algorithm>
#include <cmath>

namespace n3pom {

double condition_rhs(const CoefficientNet& net, double eta) {
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < net.dim; ++k) {
    double row = 0.0;
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      row += std::fabs(net.w2[i] * net.w1[i]);
    }
    sum_sq += row * row;
  }
  return eta * activation_bound(net.activation) * std::sqrt(sum_sq);
}

MonotonicityReport check_condition(const Model& m) {
  MonotonicityReport rep;
  const std::vector<double> s = m.intercept.slopes();
  rep.lhs = *std::min_element(s.begin(), s.end());
  rep.rhs = condition_rhs(m.net, m.eta);
  rep.satisfied = rep.lhs >= rep.rhs - kConditionTolerance;
  rep.c = rep.rhs > 0.0 ? std::min(1.0, rep.lhs / rep.rhs) : 1.0;
  return rep;
}

MonotonicityReport project(Model& m) {
  const MonotonicityReport rep = check_condition(m);
  if (rep.c >= 1.0) return rep;
  double scale = std::sqrt(rep.c);
  for (;;) {
    for (std::size_t i = 0; i < m.net.w1.size(); ++i) {
      m.net.w1[i] *= scale;
      m.net.w2[i] *= scale;
    }
    // sqrt(c) * sqrt(c) can land a few ulps above c; shave until rhs <= lhs
    // exactly, so a second projection sees c = 1.
    if (condition_rhs(m.net, m.eta) <= rep.lhs) break;
    scale = 1.0 - 1e-15;
  }
  return rep;
}

}  // namespace n3pom
