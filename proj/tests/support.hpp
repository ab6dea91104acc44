#ifndef N3POM_TESTS_SUPPORT_HPP
#define N3POM_TESTS_SUPPORT_HPP

// Shared fixtures and independent oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "n3pom/core.hpp"
#include "n3pom/dataset.hpp"
#include "n3pom/gradients.hpp"

namespace n3pom::test {

inline Model random_model(std::mt19937_64& gen, std::size_t dim, std::size_t hidden, std::size_t knots,
                          Activation act = Activation::sigmoid, double j_max = 7.0, double eta = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.2, 1.5);
  Model m;
  m.intercept = InterceptParams::equally_spaced(knots, j_max);
  m.intercept.phi = normal(gen);
  for (auto& v : m.intercept.varphi) v = (gen() & 1 ? 1.0 : -1.0) * unif(gen);
  m.net = CoefficientNet(dim, hidden, act);
  for (auto& v : m.net.w1) v = normal(gen);
  for (auto& v : m.net.v1) v = normal(gen);
  for (auto& v : m.net.w2) v = normal(gen);
  for (auto& v : m.net.v2) v = normal(gen);
  m.eta = eta;
  return m;
}

/// Uniform point in the closed d-ball of the given radius.
inline std::vector<double> random_in_ball(std::mt19937_64& gen, std::size_t dim, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(dim);
  double norm = 0.0;
  for (auto& v : x) {
    v = normal(gen);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  const double r = radius * std::pow(unif(gen), 1.0 / static_cast<double>(dim));
  for (auto& v : x) v = v / norm * r;
  return x;
}

/// Central differences of a scalar function of the packed parameters.
inline std::vector<double> fd_gradient(const Model& m, const std::function<double(const Model&)>& fn,
                                       double step = 1e-5) {
  const std::vector<double> theta = pack_params(m);
  std::vector<double> out(theta.size());
  Model work = m;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> t = theta;
    t[i] = theta[i] + step;
    unpack_params(work, t);
    const double up = fn(work);
    t[i] = theta[i] - step;
    unpack_params(work, t);
    const double down = fn(work);
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

/// |a - b| <= rel * max(|a|, |b|) or |a - b| <= abs_floor.
inline bool close(double a, double b, double rel, double abs_floor) {
  const double diff = std::abs(a - b);
  return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

/// Brute-force re-evaluation of b_k(u) with the loops in the opposite order.
inline std::vector<double> brute_b(const CoefficientNet& net, double u) {
  std::vector<double> b(net.dim, 0.0);
  for (std::size_t l = 0; l < net.hidden; ++l)
    for (std::size_t k = 0; k < net.dim; ++k) {
      const std::size_t i = k * net.hidden + l;
      const double z = net.w1[i] * u + net.v1[i];
      const double r = net.activation == Activation::sigmoid ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z);
      b[k] += net.w2[i] * r;
    }
  for (std::size_t k = 0; k < net.dim; ++k) b[k] += net.v2[k];
  return b;
}

/// Interpolation of (knots, values) by direct search; independent of cell_of.
inline double brute_interp(const std::vector<double>& knots, const std::vector<double>& values, double u) {
  for (std::size_t r = 0; r + 1 < knots.size(); ++r)
    if (u >= knots[r] && u <= knots[r + 1]) {
      const double t = (u - knots[r]) / (knots[r + 1] - knots[r]);
      return values[r] + t * (values[r + 1] - values[r]);
    }
  return NAN;
}

inline Dataset make_dataset(std::size_t dim, std::vector<double> x, std::vector<double> h, double j_max = 7.0) {
  Dataset d;
  d.dim = dim;
  d.j_max = j_max;
  d.x = std::move(x);
  d.h = std::move(h);
  for (std::size_t k = 0; k < dim; ++k) d.covariate_names.push_back("x" + std::to_string(k + 1));
  return d;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("n3pom_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace n3pom::test

#endif  // N3POM_TESTS_SUPPORT_HPP
