#ifndef N3POM_DATAGEN_HPP
#define N3POM_DATAGEN_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "n3pom/dataset.hpp"
#include "n3pom/rng.hpp"

namespace n3pom {

enum class CovariateLaw { disk_uniform, beta_half };

std::string to_string(CovariateLaw law);
CovariateLaw parse_covariate_law(std::string_view name);

/// Two-covariate synthetic family with a_*(u) = 2u - 9 and
/// b_*(u) = (-1 + m1 u^2, 1 + m2 u^2).
struct SyntheticSpec {
  std::size_t n = 1000;
  double j_max = 7.0;
  double m1 = 0.05;
  double m2 = -0.05;
  CovariateLaw law = CovariateLaw::disk_uniform;
  std::uint64_t seed = 0;

  void validate() const;
};

double true_intercept(double u);
std::array<double, 2> true_coefficients(double m1, double m2, double u);
/// a_*(u) + <b_*(u), x>.
double true_predictor(std::span<const double> x, double m1, double m2, double u);

/// n x 2 row-major covariates; row i depends only on (seed, i).
std::vector<double> sample_covariates(const SyntheticSpec& spec);

/// Root h of a_*(h) + <b_*(h), x> = logit(u01), by bisection over an
/// outward-doubling bracket starting at [-1, J + 2]. Not clamped.
double solve_response(std::span<const double> x, double m1, double m2, double j_max, double u01);

/// Inverse-CDF draw from the synthetic conditional law, clamped to [1, J].
double sample_response(std::span<const double> x, double m1, double m2, double j_max, CounterRng& rng);

/// Nearest integer in {1..J}; halves round up.
int discretize(double h, int j_max);

/// g + e clamped to [1, J] for a given offset e.
double perturb_with(int g, double e, double j_max);
/// g + e with e ~ U[-0.5, 0.5], clamped to [1, J].
double perturb(int g, double j_max, CounterRng& rng);

/// Rounds then perturbs each response; row i uses stream i of seed.
std::vector<double> perturb_all(std::span<const double> h, double j_max, std::uint64_t seed);
std::vector<double> discretize_all(std::span<const double> h, double j_max);

/// A synthetic draw with all three response variants.
struct SyntheticData {
  Dataset data;  // continuous responses in data.h
  std::vector<double> rounded;
  std::vector<double> perturbed;
};

SyntheticData generate(const SyntheticSpec& spec);

void write_synthetic_csv(const std::filesystem::path& path, const SyntheticData& s);

struct CsvOptions {
  std::string response_column = "h";
  bool rescale = false;  // map responses affinely onto [1, j_max]
  bool standardize = false;
  double j_max = 10.0;  // used when rescaling; otherwise taken as the declared response range
};

/// Comma-separated file with a header row. Every column other than the
/// response becomes a covariate, except columns listed in `ignore`.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts,
                 std::span<const std::string> ignore = {});

}  // namespace n3pom

#endif  // N3POM_DATAGEN_HPP
