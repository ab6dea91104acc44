#include "n3pom/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "n3pom/errors.hpp"
#include "n3pom/gradients.hpp"
#include "n3pom/log.hpp"

namespace n3pom {

std::string to_string(WeightMode mode) { return mode == WeightMode::uniform ? "uniform" : "cell"; }

WeightMode parse_weight_mode(std::string_view name) {
  if (name == "uniform") return WeightMode::uniform;
  if (name == "cell" || name == "inv_sqrt_cell") return WeightMode::inv_sqrt_cell;
  throw ConfigError("unknown weight mode '" + std::string(name) + "' (expected uniform or cell)");
}

TrainConfig TrainConfig::slow_schedule() {
  TrainConfig cfg;
  cfg.lr_decay = 0.97;
  cfg.lr_every = 100;
  return cfg;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(lr_init > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("learning-rate decay must lie in (0, 1]");
  if (lr_every == 0) throw ConfigError("learning-rate decay interval must be positive");
  if (!(eta_margin > 0.0)) throw ConfigError("eta margin must be positive");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be positive");
  if (trace_every == 0) throw ConfigError("trace interval must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be positive");
}

double learning_rate(const TrainConfig& cfg, std::size_t t) {
  return cfg.lr_init * std::pow(cfg.lr_decay, static_cast<double>(t / cfg.lr_every));
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,loglik,c,lr\n" << std::setprecision(17);
  for (const auto& r : trace.records) out << r.iteration << ',' << r.loglik << ',' << r.c << ',' << r.lr << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

TrainTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "iteration,loglik,c,lr") throw IoError(path.string() + ": not a training trace");
  TrainTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    TraceRecord r;
    char comma = 0;
    if (!(row >> r.iteration >> comma >> r.loglik >> comma >> r.c >> comma >> r.lr))
      throw IoError(path.string() + ": malformed trace row '" + line + "'");
    trace.records.push_back(r);
  }
  return trace;
}

std::vector<double> compute_zeta(const Dataset& data, std::span<const double> knots, WeightMode mode) {
  const std::size_t n = data.size();
  if (n == 0) throw ConfigError("cannot weight an empty dataset");
  std::vector<double> zeta(n, 1.0 / static_cast<double>(n));
  if (mode == WeightMode::uniform) return zeta;

  InterceptParams cells;
  cells.knots.assign(knots.begin(), knots.end());
  std::vector<std::size_t> cell(n);
  std::vector<double> counts(knots.size() - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cell[i] = cells.cell_of(data.h[i]);
    counts[cell[i]] += 1.0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += zeta[i] = 1.0 / std::sqrt(counts[cell[i]]);
  for (double& z : zeta) z /= total;
  return zeta;
}

// ---------------------------------------------------------------------------

MinibatchSchedule::MinibatchSchedule(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), order_(n), rng_(seed, 0xba7c) {
  if (batch_size == 0 || batch_size > n) throw ConfigError("batch size must lie in [1, n]");
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  reshuffle();
}

void MinibatchSchedule::reshuffle() {
  for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.below(i)]);
  pos_ = 0;
}

std::span<const std::size_t> MinibatchSchedule::next() {
  if (pos_ + batch_size_ > order_.size()) {
    reshuffle();
    ++epoch_;
  }
  std::span<const std::size_t> out(order_.data() + pos_, batch_size_);
  pos_ += batch_size_;
  return out;
}

// ---------------------------------------------------------------------------

double training_eta(const Dataset& data, const TrainConfig& cfg) {
  return cfg.eta ? *cfg.eta : data.max_norm() + cfg.eta_margin;
}

FitResult fit(const Dataset& data, const Model& init, const TrainConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  init.validate();
  if (data.dim != init.dim()) throw ConfigError("dataset dimension does not match model");
  if (data.size() == 0) throw ConfigError("cannot train on an empty dataset");
  if (cfg.batch_size > data.size()) throw ConfigError("batch size exceeds the number of samples");
  for (double h : data.h) {
    if (!(h >= 1.0 && h <= init.j_max())) {
      std::ostringstream msg;
      msg << "response " << h << " outside [1, " << init.j_max() << "]";
      throw ConfigError(msg.str());
    }
  }
  const double max_norm = data.max_norm();
  const double eta = training_eta(data, cfg);
  if (!(eta > max_norm)) {
    std::ostringstream msg;
    msg << "eta = " << eta << " must exceed the largest covariate norm " << max_norm;
    throw ConfigError(msg.str());
  }

  FitResult res{init, {}};
  Model& model = res.model;
  model.eta = eta;
  const std::vector<double> zeta = compute_zeta(data, model.intercept.knots, cfg.weight_mode);
  MonotonicityReport rep = project(model);

  const auto record = [&](std::size_t iter, double batch_ll, double lr) {
    res.trace.records.push_back({iter, batch_ll, full_loglik(model, data, zeta), rep.c, lr});
    log_debug() << "iter " << iter << " loglik " << res.trace.records.back().loglik << " c " << rep.c;
  };
  record(0, 0.0, learning_rate(cfg, 0));

  MinibatchSchedule schedule(data.size(), cfg.batch_size, cfg.seed);
  const double batch_scale = static_cast<double>(data.size()) / static_cast<double>(cfg.batch_size);
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const auto batch = schedule.next();
    ParamGradient grad = grad_loglik(model, data, batch, zeta);
    grad.scale(batch_scale);
    if (!grad.all_finite()) {
      std::ostringstream msg;
      msg << "non-finite gradient at iteration " << t + 1;
      throw NumericError(msg.str());
    }
    const double norm = grad.norm();
    if (norm > cfg.clip_norm) grad.scale(cfg.clip_norm / norm);

    const double lr = learning_rate(cfg, t);
    apply_step(model, grad, lr);
    rep = project(model);
    if (observer) observer(t + 1, model, rep);

    if ((t + 1) % cfg.trace_every == 0 || t + 1 == cfg.iterations)
      record(t + 1, batch_loglik(model, data, batch, zeta) * batch_scale, lr);
  }
  return res;
}

}  // namespace n3pom
