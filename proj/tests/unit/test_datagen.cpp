#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "n3pom/core.hpp"
#include "n3pom/datagen.hpp"
#include "n3pom/errors.hpp"
#include "support.hpp"

using namespace n3pom;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

// Kolmogorov-Smirnov statistic against U(0, 1).
double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - u[i]);
    d = std::max(d, u[i] - static_cast<double>(i) / n);
  }
  return d;
}

}  // namespace

TEST_CASE("covariates follow their laws") {
  SyntheticSpec spec;
  spec.n = 20000;
  spec.seed = 3;
  const auto x = sample_covariates(spec);
  double mean_r = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double r = std::hypot(x[2 * i], x[2 * i + 1]);
    CHECK(r <= 1.0);
    mean_r += r;
  }
  // r ~ U(0, 1) under this construction
  CHECK(mean_r / static_cast<double>(spec.n) == doctest::Approx(0.5).epsilon(0.02));

  spec.law = CovariateLaw::beta_half;
  double mean = 0.0;
  for (double v : sample_covariates(spec)) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    mean += v;
  }
  CHECK(mean / static_cast<double>(2 * spec.n) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(parse_covariate_law(to_string(CovariateLaw::beta_half)) == CovariateLaw::beta_half);
  CHECK_THROWS_AS(parse_covariate_law("gauss"), ConfigError);
}

TEST_CASE("response solver examples") {
  const std::vector<double> zero = {0.0, 0.0};
  // 2h - 9 = 0
  CHECK(solve_response(zero, 0.0, 0.0, 7.0, 0.5) == doctest::Approx(4.5).epsilon(1e-9));
  // 2h - 9 = logit(0.999999) lies beyond J; the unclamped root is returned
  const double far = solve_response(zero, 0.0, 0.0, 7.0, 0.999999);
  CHECK(far == doctest::Approx((9.0 + std::log(999999.0)) / 2.0).epsilon(1e-9));
  CHECK(far > 7.0);
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = test::random_in_ball(gen, 2, 1.0);
    double prev = -1e300;
    for (double u : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
      const double h = solve_response(x, 0.05, -0.05, 7.0, u);
      CHECK(h > prev);
      CHECK(std::abs(true_predictor(x, 0.05, -0.05, h) - std::log(u / (1 - u))) < 1e-8);
      prev = h;
    }
  }
}

TEST_CASE("sampled responses are clamped to the level range") {
  SyntheticSpec spec;
  spec.n = 100000;
  spec.seed = 11;
  const auto s = generate(spec);
  std::size_t clamped = 0;
  for (double h : s.data.h) {
    CHECK(h >= 1.0);
    CHECK(h <= 7.0);
    if (h == 1.0 || h == 7.0) ++clamped;
  }
  CHECK(static_cast<double>(clamped) / static_cast<double>(spec.n) < 0.02);
}

TEST_CASE("responses pass a probability-integral-transform test") {
  SyntheticSpec spec;
  spec.n = 5000;
  spec.seed = 17;
  spec.m1 = 0.1;
  spec.m2 = -0.1;
  const auto s = generate(spec);
  // randomized PIT for the atoms at the ends of [1, J]
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto x = s.data.row(i);
    const double h = s.data.h[i];
    const double lo = sigmoid(true_predictor(x, spec.m1, spec.m2, 1.0));
    const double hi = sigmoid(true_predictor(x, spec.m1, spec.m2, 7.0));
    if (h == 1.0)
      u.push_back(lo * unif(gen));
    else if (h == 7.0)
      u.push_back(hi + (1.0 - hi) * unif(gen));
    else
      u.push_back(sigmoid(true_predictor(x, spec.m1, spec.m2, h)));
  }
  // 1.63 / sqrt(n) is the 1% critical value
  CHECK(ks_uniform(u) < 1.63 / std::sqrt(static_cast<double>(spec.n)));
}

TEST_CASE("rounding and perturbation") {
  CHECK(discretize(3.4, 7) == 3);
  CHECK(discretize(3.6, 7) == 4);
  CHECK(discretize(3.5, 7) == 4);
  CHECK(discretize(1.0, 7) == 1);
  CHECK(discretize(7.0, 7) == 7);
  CHECK(perturb_with(1, -0.3, 7.0) == 1.0);
  CHECK(perturb_with(7, 0.4, 7.0) == 7.0);
  CHECK(perturb_with(4, 0.25, 7.0) == 4.25);

  CounterRng rng(9, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double p = perturb(4, 7.0, rng);
    CHECK(std::abs(p - 4.0) <= 0.5);
    sum += p;
  }
  CHECK(sum / n == doctest::Approx(4.0).epsilon(0.002));

  SyntheticSpec spec;
  spec.n = 2000;
  spec.seed = 21;
  const auto s = generate(spec);
  // rounding a perturbed level recovers the level, except at the upper half-step
  for (std::size_t i = 0; i < spec.n; ++i) {
    CHECK(std::abs(s.perturbed[i] - s.rounded[i]) <= 0.5);
    if (s.perturbed[i] - s.rounded[i] < 0.5) CHECK(discretize(s.perturbed[i], 7) == s.rounded[i]);
  }
}

TEST_CASE("generation is a pure function of the seed") {
  SyntheticSpec spec;
  spec.n = 500;
  spec.seed = 4;
  const auto a = generate(spec), b = generate(spec);
  CHECK(a.data.x == b.data.x);
  CHECK(a.data.h == b.data.h);
  CHECK(a.perturbed == b.perturbed);
  // rows do not depend on n
  SyntheticSpec longer = spec;
  longer.n = 800;
  const auto c = generate(longer);
  CHECK(std::equal(a.data.h.begin(), a.data.h.end(), c.data.h.begin()));
  spec.seed = 5;
  CHECK(generate(spec).data.h != a.data.h);

  SyntheticSpec bad;
  bad.n = 0;
  CHECK_THROWS_AS(generate(bad), ConfigError);
}

TEST_CASE("synthetic CSV round-trips through the loader") {
  test::TempDir dir("datagen");
  SyntheticSpec spec;
  spec.n = 300;
  spec.seed = 8;
  const auto s = generate(spec);
  write_synthetic_csv(dir / "d.csv", s);
  CsvOptions opts;
  opts.j_max = 7.0;
  const std::vector<std::string> ignore = {"h_rounded", "h_perturbed"};
  const Dataset d = load_csv(dir / "d.csv", opts, ignore);
  CHECK(d.dim == 2);
  CHECK(d.x == s.data.x);
  CHECK(d.h == s.data.h);
  opts.response_column = "h_rounded";
  const std::vector<std::string> ignore2 = {"h", "h_perturbed"};
  CHECK(load_csv(dir / "d.csv", opts, ignore2).h == s.rounded);
}

TEST_CASE("CSV rescaling and standardization") {
  test::TempDir dir("csv");
  write_text(dir / "a.csv", "y,z,w\n10,1,5\n20,2,5\n40,3,5\n");
  CsvOptions opts;
  opts.response_column = "y";
  opts.rescale = true;
  const Dataset d = load_csv(dir / "a.csv", opts);
  CHECK(d.h.front() == 1.0);
  CHECK(d.h.back() == 10.0);
  CHECK(d.h[1] == doctest::Approx(4.0));
  for (double raw : {10.0, 20.0, 40.0, 17.3}) CHECK(std::abs(d.rescale.inverse(d.rescale.forward(raw)) - raw) < 1e-12);

  // a constant covariate is fine unless standardizing
  CHECK(d.dim == 2);
  opts.standardize = true;
  try {
    load_csv(dir / "a.csv", opts);
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("'w'") != std::string::npos);
  }
  const std::vector<std::string> ignore = {"w"};
  const Dataset s = load_csv(dir / "a.csv", opts, ignore);
  CHECK(s.standardize[0].mean == 2.0);
  CHECK(s.standardize[0].sd == 1.0);
  CHECK(s.x == std::vector<double>{-1.0, 0.0, 1.0});
}

TEST_CASE("CSV errors") {
  test::TempDir dir("csverr");
  CsvOptions opts;
  opts.j_max = 7.0;
  write_text(dir / "text.csv", "h,x\n2,abc\n");
  CHECK_THROWS_AS(load_csv(dir / "text.csv", opts), IoError);
  write_text(dir / "short.csv", "h,x\n2\n");
  CHECK_THROWS_AS(load_csv(dir / "short.csv", opts), IoError);
  write_text(dir / "range.csv", "h,x\n0.5,1\n3,2\n");
  CHECK_THROWS_AS(load_csv(dir / "range.csv", opts), IoError);
  write_text(dir / "const.csv", "h,x\n3,1\n3,2\n");
  opts.rescale = true;
  CHECK_THROWS_AS(load_csv(dir / "const.csv", opts), IoError);
  CHECK_THROWS_AS(load_csv(dir / "missing.csv", opts), IoError);
  opts.response_column = "y";
  CHECK_THROWS_AS(load_csv(dir / "const.csv", opts), IoError);
}
