#ifndef N3POM_DATASET_HPP
#define N3POM_DATASET_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace n3pom {

/// Affine map from raw responses onto [1, J]: h = 1 + (raw - offset) * scale.
struct ResponseMap {
  double offset = 1.0;
  double scale = 1.0;

  double forward(double raw) const { return 1.0 + (raw - offset) * scale; }
  double inverse(double h) const { return offset + (h - 1.0) / scale; }
};

struct ColumnScale {
  double mean = 0.0;
  double sd = 1.0;
};

/// Covariates (row-major n x d) and responses on [1, J].
struct Dataset {
  std::size_t dim = 0;
  double j_max = 7.0;
  std::vector<double> x;
  std::vector<double> h;
  std::vector<std::string> covariate_names;
  ResponseMap rescale;
  std::vector<ColumnScale> standardize;  // empty when covariates are raw

  std::size_t size() const { return h.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }

  /// Largest Euclidean covariate norm.
  double max_norm() const;
  /// Same covariates, different responses.
  Dataset with_responses(std::vector<double> responses) const;
};

}  // namespace n3pom

#endif  // N3POM_DATASET_HPP
