#include "n3pom/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "n3pom/errors.hpp"
#include "n3pom/log.hpp"
#include "n3pom/monotonicity.hpp"

namespace n3pom {

std::vector<double> Grid::points() const {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (!(stop >= start)) throw ConfigError("grid stop must not precede start");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) out.push_back(start + step * static_cast<double>(i));
  if (stop - out.back() > 1e-9 * step) out.push_back(stop);
  return out;
}

std::vector<double> grid_mse(const CoefficientFn& est, const CoefficientFn& truth, const Grid& grid) {
  const auto pts = grid.points();
  std::vector<double> acc;
  for (double u : pts) {
    const auto e = est(u);
    const auto t = truth(u);
    if (e.size() != t.size()) throw DomainError("estimate and truth have different dimensions");
    if (acc.empty()) acc.assign(e.size(), 0.0);
    for (std::size_t k = 0; k < e.size(); ++k) acc[k] += (e[k] - t[k]) * (e[k] - t[k]);
  }
  for (double& a : acc) a /= static_cast<double>(pts.size());
  return acc;
}

ReplicateSummary aggregate_replicates(std::span<const double> values) {
  if (values.empty()) throw ConfigError("no replicate values to aggregate");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  ReplicateSummary s;
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  if (n >= 4) {
    const std::span<const double> kept(sorted.data() + 1, n - 2);
    double mean = 0.0;
    for (double v : kept) mean += v;
    mean /= static_cast<double>(kept.size());
    double ss = 0.0;
    for (double v : kept) ss += (v - mean) * (v - mean);
    s.trimmed_sd = std::sqrt(ss / static_cast<double>(kept.size() - 1));
  }
  // Three values leave a single survivor: its spread is zero.
  return s;
}

AuditReport audit_monotonicity(const Model& model, std::span<const double> xs, double u_step) {
  if (!(u_step > 0.0)) throw ConfigError("audit step must be positive");
  const std::size_t d = model.dim();
  if (d == 0 || xs.size() % d != 0) throw DomainError("covariate buffer is not a multiple of the model dimension");
  const auto grid = Grid{1.0, model.j_max(), u_step}.points();

  AuditReport rep;
  rep.num_points = xs.size() / d;
  rep.min_difference.assign(rep.num_points, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(rep.num_points);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const std::span<const double> x(xs.data() + static_cast<std::size_t>(p) * d, d);
    double prev = eval_ccp(model, grid.front(), x);
    double worst = 0.0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
      const double cur = eval_ccp(model, grid[g], x);
      worst = std::min(worst, cur - prev);
      prev = cur;
    }
    rep.min_difference[static_cast<std::size_t>(p)] = worst;
  }
  for (double w : rep.min_difference) {
    if (w < -kAuditTolerance) ++rep.violations;
    rep.worst_difference = std::min(rep.worst_difference, w);
  }
  return rep;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::continuous: return "continuous";
    case Variant::rounded: return "rounded";
    case Variant::perturbed: return "perturbed";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "continuous") return Variant::continuous;
  if (name == "rounded") return Variant::rounded;
  if (name == "perturbed") return Variant::perturbed;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected continuous, rounded or perturbed)");
}

const MseRow* MseReport::find(std::string_view method, std::string_view response) const {
  for (const auto& r : rows)
    if (r.method == method && r.response == response) return &r;
  return nullptr;
}

const std::vector<Setting>& benchmark_settings() {
  static const std::vector<Setting> settings = {
      {"mixed", 0.05, -0.05},
      {"positive", 0.05, 0.05},
      {"first", 0.05, 0.0},
      {"constant", 0.0, 0.0},
  };
  return settings;
}

const Setting& find_setting(std::string_view name) {
  for (const auto& s : benchmark_settings())
    if (s.name == name) return s;
  std::ostringstream msg;
  msg << "unknown setting '" << name << "'; valid settings:";
  for (const auto& s : benchmark_settings()) msg << ' ' << s.name << " (m1=" << s.m1 << ", m2=" << s.m2 << ")";
  throw ConfigError(msg.str());
}

namespace {

struct ReplicateResult {
  // One entry per output row, in row order.
  std::vector<std::vector<double>> mse;
};

ReplicateResult run_replicate(const SyntheticSpec& base, std::size_t r, std::span<const Variant> variants,
                              const BenchConfig& cfg, const Grid& grid) {
  SyntheticSpec spec = base;
  spec.seed = base.seed + r;
  const SyntheticData synth = generate(spec);
  const auto J = static_cast<std::size_t>(std::lround(spec.j_max));
  const Dataset rounded = synth.data.with_responses(synth.rounded);

  const CoefficientFn truth = [&](double u) {
    const auto b = true_coefficients(spec.m1, spec.m2, u);
    return std::vector<double>(b.begin(), b.end());
  };

  ReplicateResult out;
  const DiscreteFit npom = fit_discrete_observed(rounded, J, cfg.discrete);

  TrainConfig train = cfg.train;
  train.seed = cfg.train.seed + r;
  DistillOptions distill;
  distill.hidden = cfg.hidden;
  distill.sharpness = cfg.sharpness;
  distill.num_knots = cfg.num_knots;
  distill.eta = training_eta(synth.data, train);
  distill.seed = train.seed;
  distill.w2_noise_scale = cfg.w2_noise_scale;
  const Model init = init_from_discrete(npom, distill);

  for (Variant v : variants) {
    const Dataset* data = &synth.data;
    Dataset perturbed;
    if (v == Variant::rounded) data = &rounded;
    if (v == Variant::perturbed) {
      perturbed = synth.data.with_responses(synth.perturbed);
      data = &perturbed;
    }
    const FitResult fitted = fit(*data, init, train);
    out.mse.push_back(grid_mse([&](double u) { return eval_b(fitted.model.net, u); }, truth, grid));
  }

  if (cfg.include_baselines) {
    DiscreteFitOptions pom_opts = cfg.discrete;
    pom_opts.proportional = true;
    const DiscreteFit pom = fit_discrete_observed(rounded, J, pom_opts);
    for (const DiscreteFit* f : {&pom, &npom}) {
      const auto betas = extend_betas(*f);
      out.mse.push_back(grid_mse([&](double u) { return interpolate_betas(betas, u); }, truth, grid));
    }
  }
  return out;
}

}  // namespace

MseReport run_benchmark(const SyntheticSpec& spec, std::size_t replicates, std::span<const Variant> variants,
                        const BenchConfig& cfg) {
  spec.validate();
  if (replicates == 0) throw ConfigError("at least one replicate is required");
  if (cfg.jobs < 1) throw ConfigError("jobs must be positive");
  MseReport report;
  report.spec = spec;
  report.replicates = replicates;
  report.grid = cfg.grid;
  report.grid.stop = spec.j_max;

  for (Variant v : variants) report.rows.push_back({"N3POM", to_string(v), {}, {}});
  if (cfg.include_baselines) {
    report.rows.push_back({"POM", "rounded", {}, {}});
    report.rows.push_back({"NPOM", "rounded", {}, {}});
  }

  std::vector<ReplicateResult> results(replicates);
  std::vector<std::exception_ptr> errors(replicates);
  const auto count = static_cast<std::ptrdiff_t>(replicates);
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const auto idx = static_cast<std::size_t>(r);
    try {
      results[idx] = run_replicate(spec, idx, variants, cfg, report.grid);
      log_info() << "replicate " << idx << " done";
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t row = 0; row < report.rows.size(); ++row) {
    MseRow& out = report.rows[row];
    for (const auto& res : results) out.mse.push_back(res.mse[row]);
    const std::size_t dims = out.mse.front().size();
    for (std::size_t k = 0; k < dims; ++k) {
      std::vector<double> col;
      for (const auto& m : out.mse) col.push_back(m[k]);
      out.summary.push_back(aggregate_replicates(col));
    }
  }
  return report;
}

}  // namespace n3pom
