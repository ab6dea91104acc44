#ifndef N3POM_EVAL_HPP
#define N3POM_EVAL_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "n3pom/baseline.hpp"
#include "n3pom/core.hpp"
#include "n3pom/datagen.hpp"
#include "n3pom/trainer.hpp"

namespace n3pom {

/// Evaluation grid {start, start + step, ..., stop}.
struct Grid {
  double start = 1.0;
  double stop = 7.0;
  double step = 0.05;

  std::vector<double> points() const;
};

using CoefficientFn = std::function<std::vector<double>(double)>;

/// Per-coordinate mean over the grid of (est - truth)^2.
std::vector<double> grid_mse(const CoefficientFn& est, const CoefficientFn& truth, const Grid& grid);

struct ReplicateSummary {
  double median = 0.0;
  double trimmed_sd = 0.0;  // sample sd after dropping one minimum and one maximum
};

ReplicateSummary aggregate_replicates(std::span<const double> values);

inline constexpr double kAuditTolerance = 1e-10;

struct AuditReport {
  std::size_t num_points = 0;
  std::size_t violations = 0;       // points whose CCP ever drops by more than the tolerance
  double worst_difference = 0.0;    // most negative consecutive CCP difference overall
  std::vector<double> min_difference;  // per point
};

/// Scans u = 1, 1 + step, ..., J (J always included) for each covariate row
/// of `xs` (row-major, model.dim() columns).
AuditReport audit_monotonicity(const Model& model, std::span<const double> xs, double u_step);

enum class Variant { continuous, rounded, perturbed };

std::string to_string(Variant v);
Variant parse_variant(std::string_view name);

struct BenchConfig {
  TrainConfig train;
  std::size_t num_knots = 24;
  std::size_t hidden = 50;
  double sharpness = 1.0;
  double w2_noise_scale = 1.0;
  DiscreteFitOptions discrete;
  Grid grid;  // stop is reset to the synthetic J
  bool include_baselines = true;
  int jobs = 1;
};

struct MseRow {
  std::string method;    // "N3POM" or a baseline name
  std::string response;  // continuous, rounded, perturbed
  std::vector<std::vector<double>> mse;  // [replicate][coordinate]
  std::vector<ReplicateSummary> summary;  // per coordinate
};

struct MseReport {
  SyntheticSpec spec;
  Grid grid;
  std::size_t replicates = 0;
  std::vector<MseRow> rows;

  const MseRow* find(std::string_view method, std::string_view response) const;
};

/// For each replicate r: draws data with seed spec.seed + r, fits the
/// discrete NPOM on rounded responses, distills it into an initial model,
/// trains one model per variant (training seed cfg.train.seed + r) and
/// scores each against the true coefficient functions.
MseReport run_benchmark(const SyntheticSpec& spec, std::size_t replicates, std::span<const Variant> variants,
                        const BenchConfig& cfg);

/// Named (m1, m2) settings.
struct Setting {
  std::string name;
  double m1, m2;
};
const std::vector<Setting>& benchmark_settings();
const Setting& find_setting(std::string_view name);

}  // namespace n3pom

#endif  // N3POM_EVAL_HPP
