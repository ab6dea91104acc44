#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string_view>

#include "CLI11.hpp"
#include "n3pom/baseline.hpp"
#include "n3pom/core.hpp"
#include "n3pom/datagen.hpp"
#include "n3pom/errors.hpp"
#include "n3pom/eval.hpp"
#include "n3pom/io.hpp"
#include "n3pom/log.hpp"
#include "n3pom/monotonicity.hpp"
#include "n3pom/rng.hpp"
#include "n3pom/trainer.hpp"

namespace n3pom::cli {
namespace {

const std::vector<std::string> kSyntheticResponses = {"h", "h_rounded", "h_perturbed"};

struct ModelFlags {
  std::size_t knots = 24;
  std::size_t hidden = 50;
  std::string activation = "sigmoid";
  std::string init = "distill";
  double sharpness = BenchConfig{}.sharpness;
  double w2_noise = 1.0;
  double lambda = DiscreteFitOptions{}.lambda;
};

struct TrainFlags {
  TrainConfig cfg;
  std::string weight_mode = "cell";
};

struct SimulateFlags {
  SyntheticSpec spec;
  std::string setting = "mixed";
  std::string law = "disk";
  std::string out = "synthetic.csv";
  std::string manifest;
};

struct FitFlags {
  std::string data;
  std::string response_col = "h";
  double j_max = 7.0;
  bool rescale = false;
  bool standardize = false;
  std::vector<std::string> ignore;
  std::string out = "model.json";
  std::string trace;
  ModelFlags model;
  TrainFlags train;
};

struct PredictFlags {
  std::string model;
  std::string data;
  std::string out;
  std::string format = "csv";
};

struct EvaluateFlags {
  std::string model;
  std::string setting = "mixed";
  double grid_step = 0.05;
  std::string curves;
  std::string out;
};

struct BenchFlags {
  std::string setting = "mixed";
  std::size_t n = 1000;
  std::size_t replicates = 20;
  std::vector<std::string> variants = {"continuous", "perturbed", "rounded"};
  int jobs = 1;
  std::uint64_t data_seed = 0;
  std::string out;
  std::string format = "csv";
  bool no_baselines = false;
  ModelFlags model;
  TrainFlags train;
};

struct AuditFlags {
  std::string model;
  std::string data;
  std::size_t points = 1000;
  std::uint64_t seed = 0;
  double u_step = 0.01;
  std::string out;
};

// Numeric table with a header row; every cell must parse as a double.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header row");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  t.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw IoError(path + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                    " fields, expected " + std::to_string(t.header.size()));
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size() || !std::isfinite(v))
        throw IoError(path + ": row " + std::to_string(line_no) + ", column '" + t.header[c] +
                      "': not a finite number");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw IoError(path + ": no data rows");
  return t;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void add_model_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--knots", m.knots, "number of intercept knots R")->check(CLI::Range(2, 100000));
  app->add_option("--hidden", m.hidden, "hidden units L per coefficient")->check(CLI::Range(1, 100000));
  app->add_option("--activation", m.activation, "hidden activation")->check(CLI::IsMember({"sigmoid", "tanh"}));
  app->add_option("--init", m.init, "initialization")->check(CLI::IsMember({"distill", "random"}));
  app->add_option("--sharpness", m.sharpness, "steepness T of the distilled units");
  app->add_option("--w2-noise", m.w2_noise, "scale of the noise on unused output weights");
  app->add_option("--lambda", m.lambda, "adjacent-threshold penalty of the discrete baseline");
}

void add_train_flags(CLI::App* app, TrainFlags& t) {
  auto& c = t.cfg;
  app->add_option("--eta-margin", c.eta_margin, "eta = max ||x|| + margin");
  app->add_option("--batch", c.batch_size, "mini-batch size");
  app->add_option("--iterations", c.iterations, "training iterations");
  app->add_option("--lr", c.lr_init, "initial learning rate");
  app->add_option("--lr-decay", c.lr_decay, "learning-rate decay factor");
  app->add_option("--lr-every", c.lr_every, "iterations between decays");
  app->add_option("--seed", c.seed, "training seed");
  app->add_option("--weight-mode", t.weight_mode, "sample weights")
      ->check(CLI::IsMember({"uniform", "cell"}));
  app->add_option("--trace-every", c.trace_every, "iterations between trace records");
}

TrainConfig resolve(const TrainFlags& t) {
  TrainConfig c = t.cfg;
  c.weight_mode = parse_weight_mode(t.weight_mode);
  c.validate();
  return c;
}

CovariateLaw resolve_law(const std::string& name) {
  if (name == "disk") return CovariateLaw::disk_uniform;
  if (name == "beta") return CovariateLaw::beta_half;
  return parse_covariate_law(name);
}

// ---------------------------------------------------------------------------

void cmd_simulate(SimulateFlags f, std::ostream& out) {
  const Setting& s = find_setting(f.setting);
  f.spec.m1 = s.m1;
  f.spec.m2 = s.m2;
  f.spec.law = resolve_law(f.law);
  f.spec.validate();
  const SyntheticData data = generate(f.spec);
  write_synthetic_csv(f.out, data);
  const std::string manifest = f.manifest.empty() ? sibling(f.out, ".manifest.json") : f.manifest;
  Json j = synthetic_spec_to_json(f.spec);
  j["setting"] = s.name;
  j["data"] = std::filesystem::path(f.out).filename().string();
  write_json(manifest, j);
  out << "wrote " << f.out << " and " << manifest << '\n';
}

Json preprocessing_json(const Dataset& d) {
  Json j;
  j["covariates"] = d.covariate_names;
  j["response_offset"] = d.rescale.offset;
  j["response_scale"] = d.rescale.scale;
  Json cols = Json::array();
  for (const auto& c : d.standardize) cols.push_back({{"mean", c.mean}, {"sd", c.sd}});
  j["standardize"] = cols;
  return j;
}

void cmd_fit(const FitFlags& f, std::ostream& out) {
  if (f.data.empty()) throw ConfigError("fit requires --data");
  CsvOptions opts;
  opts.response_column = f.response_col;
  opts.rescale = f.rescale;
  opts.standardize = f.standardize;
  opts.j_max = f.j_max;
  std::vector<std::string> ignore = f.ignore;
  for (const auto& name : kSyntheticResponses)
    if (name != f.response_col) ignore.push_back(name);
  const Dataset data = load_csv(f.data, opts, ignore);
  log_info() << "loaded " << data.size() << " rows, " << data.dim << " covariates";

  const TrainConfig cfg = resolve(f.train);
  const double eta = training_eta(data, cfg);
  const Activation act = parse_activation(f.model.activation);

  Model init;
  Json baseline;
  if (f.model.init == "random") {
    init = init_random(data.dim, data.j_max, f.model.knots, f.model.hidden, act, eta, cfg.seed);
  } else {
    const double J = std::round(data.j_max);
    if (J != data.j_max || J < 3) throw ConfigError("distillation needs an integer --j-max of at least 3");
    const auto classes = static_cast<std::size_t>(J);
    DiscreteFitOptions dopts;
    dopts.lambda = f.model.lambda;
    const DiscreteFit npom = fit_discrete_observed(data.with_responses(discretize_all(data.h, data.j_max)), classes, dopts);
    log_info() << "discrete baseline: " << npom.iterations << " iterations, loglik " << npom.loglik;
    baseline = discrete_fit_to_json(npom);
    DistillOptions d;
    d.hidden = f.model.hidden;
    d.sharpness = f.model.sharpness;
    d.num_knots = f.model.knots;
    d.eta = eta;
    d.seed = cfg.seed;
    d.w2_noise_scale = f.model.w2_noise;
    d.activation = act;
    init = init_from_discrete(npom, d);
  }
  // fit() projects the initial model before the first step.
  const FitResult res = fit(data, init, cfg);

  Json j = model_to_json(res.model);
  j["preprocessing"] = preprocessing_json(data);
  if (!baseline.is_null()) j["baseline"] = baseline;
  write_json(f.out, j);
  const std::string trace = f.trace.empty() ? sibling(f.out, ".trace.csv") : f.trace;
  write_trace_csv(trace, res.trace);
  const auto& last = res.trace.records.back();
  out << "iterations " << last.iteration << ", weighted loglik " << last.loglik << ", c " << last.c << '\n';
  out << "wrote " << f.out << " and " << trace << '\n';
}

// Standardization stored alongside the model, if any.
std::vector<ColumnScale> stored_scales(const Json& j, std::size_t dim) {
  std::vector<ColumnScale> scales;
  if (!j.contains("preprocessing")) return scales;
  for (const auto& c : j.at("preprocessing").at("standardize"))
    scales.push_back({c.at("mean").get<double>(), c.at("sd").get<double>()});
  if (!scales.empty() && scales.size() != dim) throw IoError("model preprocessing does not match its dimension");
  return scales;
}

void cmd_predict(const PredictFlags& f, std::ostream& out) {
  if (f.model.empty() || f.data.empty()) throw ConfigError("predict requires --model and --data");
  const Json mj = read_json(f.model);
  const Model m = model_from_json(mj);
  const auto scales = stored_scales(mj, m.dim());
  const Table t = read_table(f.data);
  const auto u_it = std::find(t.header.begin(), t.header.end(), "u");
  if (u_it == t.header.end()) throw IoError(f.data + ": missing column 'u'");
  const auto u_col = static_cast<std::size_t>(u_it - t.header.begin());
  if (t.header.size() - 1 != m.dim())
    throw ConfigError(f.data + ": expected " + std::to_string(m.dim()) + " covariate columns, found " +
                      std::to_string(t.header.size() - 1));

  const std::size_t d = m.dim();
  std::vector<std::string> cols = {"u", "ccp", "cpd"};
  for (const char* p : {"b_", "s_", "me_"})
    for (std::size_t k = 1; k <= d; ++k) cols.push_back(p + std::to_string(k));

  std::vector<std::vector<double>> rows;
  std::vector<double> x(d);
  for (const auto& row : t.rows) {
    std::size_t k = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == u_col) continue;
      x[k] = scales.empty() ? row[c] : (row[c] - scales[k].mean) / scales[k].sd;
      ++k;
    }
    const double u = row[u_col];
    std::vector<double> r = {u, eval_ccp(m, u, x), eval_cpd(m, u, x)};
    const auto b = eval_b(m.net, u);
    const auto me = eval_marginal_effect(m, u, x);
    for (double v : b) r.push_back(v);
    for (double v : b) r.push_back(-v);
    for (double v : me) r.push_back(v);
    rows.push_back(std::move(r));
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!f.out.empty()) {
    file = open_out(f.out);
    sink = &file;
  }
  if (f.format == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json o;
      for (std::size_t c = 0; c < cols.size(); ++c) o[cols[c]] = r[c];
      arr.push_back(o);
    }
    *sink << arr.dump(2) << '\n';
  } else {
    for (std::size_t c = 0; c < cols.size(); ++c) *sink << (c ? "," : "") << cols[c];
    *sink << '\n' << std::setprecision(17);
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) *sink << (c ? "," : "") << r[c];
      *sink << '\n';
    }
  }
  if (!*sink) throw IoError("failed writing predictions");
}

void cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  if (f.model.empty()) throw ConfigError("evaluate requires --model");
  const Model m = load_model(f.model);
  if (m.dim() != 2) throw ConfigError("evaluate compares against the two-covariate synthetic family");
  const Setting& s = find_setting(f.setting);
  Grid grid;
  grid.stop = m.j_max();
  grid.step = f.grid_step;
  auto est = [&](double u) { return eval_b(m.net, u); };
  auto truth = [&](double u) {
    const auto b = true_coefficients(s.m1, s.m2, u);
    return std::vector<double>(b.begin(), b.end());
  };
  Json j;
  j["setting"] = s.name;
  j["mse"] = grid_mse(est, truth, grid);
  j["condition"] = report_to_json(check_condition(m));
  if (!f.out.empty())
    write_json(f.out, j);
  else
    out << j.dump(2) << '\n';
  if (!f.curves.empty()) {
    auto file = open_out(f.curves);
    file << "u,b_1,b_2,true_1,true_2\n" << std::setprecision(17);
    for (double u : grid.points()) {
      const auto b = est(u);
      const auto t = truth(u);
      file << u << ',' << b[0] << ',' << b[1] << ',' << t[0] << ',' << t[1] << '\n';
    }
    if (!file) throw IoError("failed writing " + f.curves);
  }
}

void cmd_bench(const BenchFlags& f, std::ostream& out) {
  const Setting& s = find_setting(f.setting);
  SyntheticSpec spec;
  spec.n = f.n;
  spec.m1 = s.m1;
  spec.m2 = s.m2;
  spec.seed = f.data_seed;
  BenchConfig cfg;
  cfg.train = resolve(f.train);
  cfg.num_knots = f.model.knots;
  cfg.hidden = f.model.hidden;
  cfg.sharpness = f.model.sharpness;
  cfg.w2_noise_scale = f.model.w2_noise;
  cfg.discrete.lambda = f.model.lambda;
  cfg.include_baselines = !f.no_baselines;
  cfg.jobs = f.jobs;
  if (f.model.init != "distill" || f.model.activation != "sigmoid")
    throw ConfigError("bench always uses the distilled sigmoid initialization");
  std::vector<Variant> variants;
  for (const auto& v : f.variants) variants.push_back(parse_variant(v));
  const MseReport rep = run_benchmark(spec, f.replicates, variants, cfg);
  print_mse_table(out, rep);
  if (!f.out.empty()) {
    if (f.format == "json") {
      write_json(f.out, mse_report_to_json(rep));
    } else {
      auto file = open_out(f.out);
      write_mse_report_csv(file, rep);
      if (!file) throw IoError("failed writing " + f.out);
    }
    out << "wrote " << f.out << '\n';
  }
}

// Returns true when the model passed.
bool cmd_audit(const AuditFlags& f, std::ostream& out) {
  if (f.model.empty()) throw ConfigError("audit requires --model");
  if (!(f.u_step > 0.0)) throw ConfigError("--u-step must be positive");
  const Model m = load_model(f.model);
  const std::size_t d = m.dim();
  std::vector<double> xs;
  if (!f.data.empty()) {
    const Table t = read_table(f.data);
    if (t.header.size() != d)
      throw ConfigError(f.data + ": expected " + std::to_string(d) + " covariate columns");
    for (const auto& r : t.rows) xs.insert(xs.end(), r.begin(), r.end());
  } else {
    // Uniform in the ball of radius eta: direction from normals, radius eta * U^(1/d).
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < f.points; ++i) {
      CounterRng rng(f.seed, i);
      std::vector<double> z(d);
      double norm = 0.0;
      for (auto& v : z) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      const double r = m.eta * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
      for (double v : z) xs.push_back(norm > 0.0 ? v / norm * r : 0.0);
    }
  }
  const AuditReport rep = audit_monotonicity(m, xs, f.u_step);
  Json j = audit_to_json(rep);
  j["condition"] = report_to_json(check_condition(m));
  if (!f.out.empty())
    write_json(f.out, j);
  else
    out << j.dump(2) << '\n';
  return rep.violations == 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural-network non-proportional odds model for ordinal and continuous responses", "n3pom"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "draw a synthetic dataset");
  simulate->add_option("--n", sim.spec.n, "sample size");
  simulate->add_option("--j-max", sim.spec.j_max, "upper end J of the response range");
  simulate->add_option("--setting", sim.setting, "coefficient setting (mixed, positive, first, constant)");
  simulate->add_option("--law", sim.law, "covariate law")->check(CLI::IsMember({"disk", "beta"}));
  simulate->add_option("--seed", sim.spec.seed, "data seed");
  simulate->add_option("--out", sim.out, "dataset CSV path");
  simulate->add_option("--manifest", sim.manifest, "manifest JSON path (default <out>.manifest.json)");

  FitFlags fitf;
  auto* fitc = app.add_subcommand("fit", "train a model on a CSV dataset");
  fitc->add_option("--data", fitf.data, "input CSV")->required();
  fitc->add_option("--response-col", fitf.response_col, "response column");
  fitc->add_option("--j-max", fitf.j_max, "upper end J of the response range");
  fitc->add_flag("--rescale", fitf.rescale, "map responses affinely onto [1, J]");
  fitc->add_flag("--standardize", fitf.standardize, "standardize covariate columns");
  fitc->add_option("--ignore", fitf.ignore, "columns to drop")->delimiter(',');
  fitc->add_option("--out", fitf.out, "model JSON path");
  fitc->add_option("--trace", fitf.trace, "trace CSV path (default <out>.trace.csv)");
  add_model_flags(fitc, fitf.model);
  add_train_flags(fitc, fitf.train);

  PredictFlags pred;
  auto* predict = app.add_subcommand("predict", "evaluate a model at query rows (u, x)");
  predict->add_option("--model", pred.model, "model JSON")->required();
  predict->add_option("--data", pred.data, "query CSV with a 'u' column and the covariates")->required();
  predict->add_option("--out", pred.out, "output path (default stdout)");
  predict->add_option("--format", pred.format, "output format")->check(CLI::IsMember({"csv", "json"}));

  EvaluateFlags evf;
  auto* evaluate = app.add_subcommand("evaluate", "compare a model with a synthetic setting");
  evaluate->add_option("--model", evf.model, "model JSON")->required();
  evaluate->add_option("--setting", evf.setting, "coefficient setting");
  evaluate->add_option("--grid-step", evf.grid_step, "evaluation grid step");
  evaluate->add_option("--curves", evf.curves, "CSV of estimated and true coefficient curves");
  evaluate->add_option("--out", evf.out, "report JSON path (default stdout)");

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "replicated synthetic benchmark");
  bench->add_option("--setting", bf.setting, "coefficient setting");
  bench->add_option("--n", bf.n, "sample size per replicate");
  bench->add_option("--replicates", bf.replicates, "number of replicates");
  bench->add_option("--variants", bf.variants, "response variants")->delimiter(',');
  bench->add_option("--jobs", bf.jobs, "parallel replicate workers")->check(CLI::PositiveNumber);
  bench->add_option("--data-seed", bf.data_seed, "seed of the first replicate's data");
  bench->add_option("--out", bf.out, "report path");
  bench->add_option("--format", bf.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  bench->add_flag("--no-baselines", bf.no_baselines, "skip the discrete baselines");
  add_model_flags(bench, bf.model);
  add_train_flags(bench, bf.train);

  AuditFlags af;
  auto* audit = app.add_subcommand("audit", "grid check of monotonicity in u");
  audit->add_option("--model", af.model, "model JSON")->required();
  audit->add_option("--data", af.data, "covariate CSV (default: random points in the eta ball)");
  audit->add_option("--points", af.points, "random points when no data is given");
  audit->add_option("--seed", af.seed, "seed for the random points");
  audit->add_option("--u-step", af.u_step, "grid step in u");
  audit->add_option("--out", af.out, "report JSON path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (simulate->parsed()) cmd_simulate(sim, out);
    if (fitc->parsed()) cmd_fit(fitf, out);
    if (predict->parsed()) cmd_predict(pred, out);
    if (evaluate->parsed()) cmd_evaluate(evf, out);
    if (bench->parsed()) cmd_bench(bf, out);
    if (audit->parsed() && !cmd_audit(af, out)) {
      err << "error: monotonicity violations found\n";
      return kNumericError;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

}  // namespace n3pom::cli
