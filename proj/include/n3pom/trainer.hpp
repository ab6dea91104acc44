#ifndef N3POM_TRAINER_HPP
#define N3POM_TRAINER_HPP

// Monotonicity-preserving stochastic training: each iteration takes one
// mini-batch gradient-ascent step on the weighted log-likelihood and then
// rescales the network weights so the sufficient monotonicity condition
// holds again.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "n3pom/core.hpp"
#include "n3pom/dataset.hpp"
#include "n3pom/monotonicity.hpp"
#include "n3pom/rng.hpp"

namespace n3pom {

enum class WeightMode { uniform, inv_sqrt_cell };

std::string to_string(WeightMode mode);
WeightMode parse_weight_mode(std::string_view name);

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t iterations = 5000;
  double lr_init = 0.03;
  double lr_decay = 0.95;
  std::size_t lr_every = 50;
  WeightMode weight_mode = WeightMode::inv_sqrt_cell;
  std::uint64_t seed = 0;
  double eta_margin = 1e-2;
  std::optional<double> eta;  // overrides max ||x_i|| + eta_margin
  std::size_t trace_every = 100;
  double clip_norm = 1e3;

  /// Slower decay: x0.97 every 100 iterations.
  static TrainConfig slow_schedule();
  void validate() const;
};

/// lr_init * lr_decay^floor(t / lr_every) for the step with 0-based index t.
double learning_rate(const TrainConfig& cfg, std::size_t t);

struct TraceRecord {
  std::size_t iteration = 0;
  double batch_loglik = 0.0;
  double loglik = 0.0;  // full data
  double c = 1.0;       // projection coefficient of the last step
  double lr = 0.0;
};

struct TrainTrace {
  std::vector<TraceRecord> records;
};

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);
TrainTrace read_trace_csv(const std::filesystem::path& path);

/// Per-sample weights summing to one. inv_sqrt_cell gives zeta_i proportional
/// to 1 / sqrt(n_r) where n_r counts responses in the intercept cell of h_i.
std::vector<double> compute_zeta(const Dataset& data, std::span<const double> knots, WeightMode mode);

/// Uniform without-replacement mini-batches; the index permutation is
/// reshuffled whenever fewer than batch_size unseen indices remain.
class MinibatchSchedule {
 public:
  MinibatchSchedule(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  std::span<const std::size_t> next();
  std::size_t epoch() const { return epoch_; }

 private:
  void reshuffle();

  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::size_t epoch_ = 0;
  CounterRng rng_;
};

struct FitResult {
  Model model;
  TrainTrace trace;
};

/// Called after each projection with the 1-based iteration count.
using StepObserver = std::function<void(std::size_t iteration, const Model& model, const MonotonicityReport& report)>;

/// Runs the training loop from `init`. The returned model carries the eta
/// used for training and satisfies the monotonicity condition.
FitResult fit(const Dataset& data, const Model& init, const TrainConfig& cfg, const StepObserver& observer = {});

/// The radius fit() will use for this dataset.
double training_eta(const Dataset& data, const TrainConfig& cfg);

}  // namespace n3pom

#endif  // N3POM_TRAINER_HPP
