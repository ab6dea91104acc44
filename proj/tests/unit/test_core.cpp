#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "n3pom/core.hpp"
#include "n3pom/errors.hpp"
#include "n3pom/monotonicity.hpp"
#include "support.hpp"

using namespace n3pom;
using n3pom::test::close;

namespace {

InterceptParams two_knot(double phi, double varphi2) {
  InterceptParams p;
  p.knots = {1.0, 7.0};
  p.phi = phi;
  p.varphi = {varphi2};
  return p;
}

InterceptParams three_knot() {
  InterceptParams p;
  p.knots = {1.0, 4.0, 7.0};
  p.phi = -1.0;
  p.varphi = {2.0, 0.5};
  return p;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

TEST_CASE("intercept interpolates knot values") {
  const auto p = two_knot(0.0, 3.0);
  CHECK(eval_a(p, 1.0) == 0.0);
  CHECK(eval_a(p, 7.0) == 3.0);
  CHECK(eval_a(p, 4.0) == doctest::Approx(1.5).epsilon(1e-15));

  const auto q = three_knot();
  CHECK(eval_a(q, 1.0) == q.phi);
  CHECK(eval_a(q, 5.5) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(eval_a(q, 5.5) == doctest::Approx(test::brute_interp(q.knots, q.alphas(), 5.5)).epsilon(1e-15));
}

TEST_CASE("negative increments still give a non-decreasing intercept") {
  InterceptParams p = InterceptParams::equally_spaced(5, 7.0);
  p.phi = 0.3;
  p.varphi = {-1.0, 2.0, -0.5, 0.0};
  const auto alphas = p.alphas();
  CHECK(alphas == std::vector<double>{0.3, 1.3, 3.3, 3.8, 3.8});
  for (double s : p.slopes()) CHECK(s >= 0.0);
}

TEST_CASE("intercept derivative takes the right cell at interior knots") {
  CHECK(eval_a_deriv(two_knot(0.0, 3.0), 2.5) == 0.5);
  CHECK(eval_a_deriv(two_knot(0.0, 0.0), 1.0) == 0.0);

  const auto q = three_knot();
  CHECK(eval_a_deriv(q, 4.0) == doctest::Approx(0.5 / 3.0));
  CHECK(eval_a_deriv(q, std::nextafter(4.0, 0.0)) == doctest::Approx(2.0 / 3.0));
  CHECK(eval_a_deriv(q, 7.0) == doctest::Approx(0.5 / 3.0));
  CHECK(q.cell_of(1.0) == 0);
  CHECK(q.cell_of(4.0) == 1);
  CHECK(q.cell_of(7.0) == 1);
}

TEST_CASE("intercept rejects u outside the response range") {
  const auto q = three_knot();
  CHECK_THROWS_AS(eval_a(q, 0.999), DomainError);
  CHECK_THROWS_AS(eval_a(q, 7.001), DomainError);
  CHECK_THROWS_AS(eval_a_deriv(q, std::nan("")), DomainError);
}

TEST_CASE("intercept is continuous and non-decreasing on a fine grid") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 10; ++rep) {
    const Model m = test::random_model(gen, 1, 1, 24);
    double prev = eval_a(m.intercept, 1.0);
    for (int i = 1; i <= 10000; ++i) {
      const double u = 1.0 + 6.0 * i / 10000.0;
      const double a = eval_a(m.intercept, std::min(u, 7.0));
      CHECK(a - prev >= -1e-12);
      CHECK(a - prev <= 0.01);  // no jumps: max slope is below 1.5 / 0.26
      prev = a;
    }
    const auto alphas = m.intercept.alphas();
    for (std::size_t r = 0; r < alphas.size(); ++r)
      CHECK(std::abs(eval_a(m.intercept, m.intercept.knots[r]) - alphas[r]) <= 1e-14);
  }
}

TEST_CASE("malformed intercepts are rejected") {
  InterceptParams p = three_knot();
  p.knots = {1.0, 1.0, 7.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = three_knot();
  p.knots = {0.5, 4.0, 7.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = three_knot();
  p.varphi = {1.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("coefficient network closed forms") {
  CoefficientNet net(2, 3, Activation::sigmoid);
  net.v2 = {0.7, -1.2};
  for (double u : {-3.0, 1.0, 4.2, 100.0}) {
    const auto b = eval_b(net, u);
    CHECK(b == std::vector<double>{0.7, -1.2});
    CHECK(eval_b_deriv(net, u) == std::vector<double>{0.0, 0.0});
  }

  CoefficientNet one(1, 1, Activation::sigmoid);
  one.w2 = {1.0};
  CHECK(eval_b(one, 3.0)[0] == 0.5);

  CoefficientNet th(1, 1, Activation::tanh);
  th.w1 = {1.0};
  th.w2 = {1.0};
  CHECK(eval_b_deriv(th, 0.0)[0] == 1.0);
}

TEST_CASE("coefficient network matches brute-force summation and finite differences") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unif(1.0, 7.0);
  for (Activation act : {Activation::sigmoid, Activation::tanh}) {
    for (int rep = 0; rep < 100; ++rep) {
      const Model m = test::random_model(gen, 3, 7, 5, act);
      const double u = unif(gen);
      const auto b = eval_b(m.net, u);
      const auto oracle = test::brute_b(m.net, u);
      const auto db = eval_b_deriv(m.net, u);
      const double h = 1e-5;
      const auto up = eval_b(m.net, u + h);
      const auto down = eval_b(m.net, u - h);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(close(b[k], oracle[k], 1e-12, 1e-14));
        CHECK(close(db[k], (up[k] - down[k]) / (2 * h), 1e-6, 1e-8));
      }
    }
  }
}

TEST_CASE("predictor composes intercept and coefficients") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Model m = test::random_model(gen, 2, 4, 6);
    const auto x = test::random_in_ball(gen, 2, 1.0);
    const double u = 1.0 + 6.0 * std::uniform_real_distribution<double>(0, 1)(gen);
    const auto b = eval_b(m.net, u);
    CHECK(eval_f(m, u, x) == doctest::Approx(eval_a(m.intercept, u) + b[0] * x[0] + b[1] * x[1]).epsilon(1e-13));
    const std::vector<double> zero(2, 0.0);
    CHECK(eval_f(m, u, zero) == eval_a(m.intercept, u));
  }
}

TEST_CASE("predictor is affine in u for linear intercept and constant coefficients") {
  Model m;
  m.intercept = two_knot(-2.0, 6.0);
  m.net = CoefficientNet(2, 2, Activation::sigmoid);
  m.net.v2 = {0.5, -0.25};
  const std::vector<double> x = {0.4, 0.2};
  const double base = eval_f(m, 1.0, x);
  for (int i = 0; i <= 60; ++i) {
    const double u = 1.0 + 0.1 * i;
    CHECK(eval_f(m, std::min(u, 7.0), x) == doctest::Approx(base + (std::min(u, 7.0) - 1.0)).epsilon(1e-13));
  }
}

TEST_CASE("dimension mismatch is rejected") {
  std::mt19937_64 gen(1);
  const Model m = test::random_model(gen, 2, 3, 4);
  const std::vector<double> x = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(eval_f(m, 2.0, x), DomainError);
}

TEST_CASE("sigmoid helpers are stable and consistent") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(std::isfinite(log_sigmoid_d1(-800.0)));
  CHECK(log_sigmoid_d1(-800.0) == doctest::Approx(-800.0).epsilon(1e-12));
  for (double z : {-30.0, -3.0, -0.2, 0.0, 1.7, 12.0, 30.0}) {
    const double s = sigmoid(z);
    CHECK(sigmoid_d1(z) == doctest::Approx(s * (1 - s)).epsilon(1e-12));
    CHECK(sigmoid_d2(z) == doctest::Approx(sigmoid_d1(z) * (1 - 2 * s)).epsilon(1e-12));
    // the simplified ratio used by the gradients
    if (sigmoid_d1(z) > 1e-300) CHECK(sigmoid_d2(z) / sigmoid_d1(z) == doctest::Approx(1 - 2 * s).epsilon(1e-12));
    CHECK(std::log(sigmoid_d1(z)) == doctest::Approx(log_sigmoid_d1(z)).epsilon(1e-12));
  }
  CHECK(activation_bound(Activation::sigmoid) == 0.25);
  CHECK(activation_bound(Activation::tanh) == 1.0);
  for (double z : {-2.0, 0.3, 4.0}) {
    const double t = std::tanh(z);
    CHECK(activate_d2(Activation::tanh, z) == doctest::Approx(-2 * t * (1 - t * t)).epsilon(1e-12));
  }
}

TEST_CASE("conditional probability and density") {
  Model m;
  m.intercept = two_knot(-3.0, 6.0);  // a(u) = u - 4
  m.net = CoefficientNet(2, 2, Activation::sigmoid);
  const std::vector<double> x = {0.3, -0.9};
  CHECK(eval_ccp(m, 4.0, x) == 0.5);
  CHECK(eval_cpd(m, 4.0, x) == 0.25);

  m.intercept = two_knot(1000.0, 6.0);
  CHECK(eval_ccp(m, 4.0, x) == 1.0);
  CHECK(std::isfinite(eval_cpd(m, 4.0, x)));
}

TEST_CASE("logit of the probability recovers the predictor") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 100; ++rep) {
    const Model m = test::random_model(gen, 2, 5, 8);
    const auto x = test::random_in_ball(gen, 2, 1.0);
    const double u = 1.0 + 6.0 * std::uniform_real_distribution<double>(0, 1)(gen);
    const double f = eval_f(m, u, x);
    if (std::abs(f) <= 30.0) CHECK(logit(eval_ccp(m, u, x)) == doctest::Approx(f).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("density integrates to the probability increment and matches differences in u") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 10; ++rep) {
    Model m = test::random_model(gen, 2, 4, 7);
    m.eta = 1.0;
    project(m);
    const auto x = test::random_in_ball(gen, 2, 1.0);
    // Simpson on each cell separately (the density jumps at knots).
    double integral = 0.0;
    for (std::size_t r = 0; r + 1 < m.intercept.knots.size(); ++r) {
      const double lo = m.intercept.knots[r], hi = m.intercept.knots[r + 1];
      const int steps = 200;
      const double hstep = (hi - lo) / steps;
      const double inner_hi = std::nextafter(hi, lo);
      double s = eval_cpd(m, lo, x) + eval_cpd(m, r + 2 == m.intercept.knots.size() ? hi : inner_hi, x);
      for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * eval_cpd(m, lo + i * hstep, x);
      integral += s * hstep / 3.0;
    }
    CHECK(std::abs(integral - (eval_ccp(m, 7.0, x) - eval_ccp(m, 1.0, x))) < 1e-6);

    const double u = 2.1 + 0.37 * rep / 10.0;
    if (std::abs(u - m.intercept.knots[m.intercept.cell_of(u)]) > 1e-3) {
      const double h = 1e-6;
      const double fd = (eval_ccp(m, u + h, x) - eval_ccp(m, u - h, x)) / (2 * h);
      CHECK(close(eval_cpd(m, u, x), fd, 1e-6, 1e-9));
    }
  }
}

TEST_CASE("marginal effect") {
  Model m;
  m.intercept = two_knot(-3.0, 6.0);
  m.net = CoefficientNet(2, 1, Activation::sigmoid);
  m.net.v2 = {0.8, -0.4};
  const std::vector<double> zero = {0.0, 0.0};
  const auto me = eval_marginal_effect(m, 4.0, zero);
  CHECK(me[0] == doctest::Approx(-0.2));
  CHECK(me[1] == doctest::Approx(0.1));

  m.intercept = two_knot(60.0, 6.0);
  for (double v : eval_marginal_effect(m, 4.0, zero)) CHECK(std::abs(v) < 1e-20);

  std::mt19937_64 gen(29);
  for (int rep = 0; rep < 50; ++rep) {
    const Model r = test::random_model(gen, 3, 4, 6);
    auto x = test::random_in_ball(gen, 3, 1.0);
    const double u = 1.5 + 5.0 * std::uniform_real_distribution<double>(0, 1)(gen);
    const auto eff = eval_marginal_effect(r, u, x);
    for (std::size_t k = 0; k < 3; ++k) {
      const double h = 1e-6;
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = ((1 - eval_ccp(r, u, xp)) - (1 - eval_ccp(r, u, xm))) / (2 * h);
      CHECK(close(eff[k], fd, 1e-6, 1e-9));
    }
  }
}

TEST_CASE("monotone in u on the ball once the condition holds") {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 5; ++rep) {
    Model m = test::random_model(gen, 2, 6, 10, rep % 2 ? Activation::tanh : Activation::sigmoid, 7.0, 1.3);
    project(m);
    REQUIRE(check_condition(m).satisfied);
    for (int i = 0; i < 1000; ++i) {
      const auto x = test::random_in_ball(gen, 2, m.eta);
      double prev = eval_f(m, 1.0, x);
      for (int s = 1; s <= 600; ++s) {
        const double f = eval_f(m, std::min(1.0 + 0.01 * s, 7.0), x);
        if (f - prev < -1e-10) FAIL("f decreased at draw " << i);
        prev = f;
      }
    }
  }
}

TEST_CASE("non-constant coefficients break monotonicity far from the origin") {
  // For any non-constant b there is a direction along which f decreases in
  // u once x is scaled far enough.
  std::mt19937_64 gen(37);
  for (int rep = 0; rep < 20; ++rep) {
    Model m = test::random_model(gen, 2, 3, 6);
    const double u = 3.3;
    const auto db = eval_b_deriv(m.net, u);
    const double norm = std::hypot(db[0], db[1]);
    REQUIRE(norm > 0.0);
    const double scale = 2.0 * (eval_a_deriv(m.intercept, u) + 1.0) / (norm * norm);
    const std::vector<double> x = {-db[0] * scale, -db[1] * scale};
    CHECK(eval_f_deriv(m, u, x) < 0.0);
    CHECK(eval_f(m, u + 1e-4, x) < eval_f(m, u, x));
  }
}
