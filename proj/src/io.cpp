#include "n3pom/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "n3pom/errors.hpp"

namespace n3pom {

namespace {

std::vector<std::vector<double>> rows_of(const std::vector<double>& flat, std::size_t dim, std::size_t hidden) {
  std::vector<std::vector<double>> out(dim);
  for (std::size_t k = 0; k < dim; ++k) out[k].assign(flat.begin() + k * hidden, flat.begin() + (k + 1) * hidden);
  return out;
}

std::vector<double> flatten_rows(const Json& rows, std::size_t dim, std::size_t hidden, const char* name) {
  if (!rows.is_array() || rows.size() != dim) throw IoError(std::string("model field '") + name + "' has the wrong shape");
  std::vector<double> out;
  for (const auto& row : rows) {
    auto v = row.get<std::vector<double>>();
    if (v.size() != hidden) throw IoError(std::string("model field '") + name + "' rows differ in length");
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

template <class F>
auto parse_guard(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed JSON document: ") + e.what());
  }
}

}  // namespace

Json model_to_json(const Model& m) {
  const auto& net = m.net;
  return Json{
      {"j_max", m.j_max()},
      {"eta", m.eta},
      {"activation", to_string(net.activation)},
      {"knots", m.intercept.knots},
      {"phi", m.intercept.phi},
      {"varphi", m.intercept.varphi},
      {"w1", rows_of(net.w1, net.dim, net.hidden)},
      {"v1", rows_of(net.v1, net.dim, net.hidden)},
      {"w2", rows_of(net.w2, net.dim, net.hidden)},
      {"v2", net.v2},
  };
}

Model model_from_json(const Json& j) {
  return parse_guard([&] {
    Model m;
    m.eta = j.at("eta").get<double>();
    m.intercept.knots = j.at("knots").get<std::vector<double>>();
    m.intercept.phi = j.at("phi").get<double>();
    m.intercept.varphi = j.at("varphi").get<std::vector<double>>();
    if (m.intercept.knots.empty() || j.at("j_max").get<double>() != m.intercept.knots.back())
      throw IoError("model j_max does not match the last knot");
    const auto& w1 = j.at("w1");
    const std::size_t dim = w1.size();
    const std::size_t hidden = dim > 0 ? w1.at(0).size() : 0;
    m.net = CoefficientNet(dim, hidden, parse_activation(j.at("activation").get<std::string>()));
    m.net.w1 = flatten_rows(w1, dim, hidden, "w1");
    m.net.v1 = flatten_rows(j.at("v1"), dim, hidden, "v1");
    m.net.w2 = flatten_rows(j.at("w2"), dim, hidden, "w2");
    m.net.v2 = j.at("v2").get<std::vector<double>>();
    try {
      m.validate();
    } catch (const ConfigError& e) {
      throw IoError(std::string("invalid model: ") + e.what());
    }
    return m;
  });
}

Json report_to_json(const MonotonicityReport& rep) {
  return Json{{"lhs", rep.lhs}, {"rhs", rep.rhs}, {"satisfied", rep.satisfied}, {"c", rep.c}};
}

Json audit_to_json(const AuditReport& rep) {
  return Json{{"num_points", rep.num_points},
              {"violations", rep.violations},
              {"worst_difference", rep.worst_difference},
              {"tolerance", kAuditTolerance}};
}

Json discrete_fit_to_json(const DiscreteFit& fit) {
  return Json{{"alphas", fit.alphas},         {"betas", fit.betas},       {"penalty_lambda", fit.penalty_lambda},
              {"proportional", fit.proportional}, {"iterations", fit.iterations}, {"converged", fit.converged},
              {"loglik", fit.loglik}};
}

DiscreteFit discrete_fit_from_json(const Json& j) {
  return parse_guard([&] {
    DiscreteFit fit;
    fit.alphas = j.at("alphas").get<std::vector<double>>();
    fit.betas = j.at("betas").get<std::vector<std::vector<double>>>();
    fit.penalty_lambda = j.value("penalty_lambda", 0.0);
    fit.proportional = j.value("proportional", false);
    fit.iterations = j.value("iterations", std::size_t{0});
    fit.converged = j.value("converged", false);
    fit.loglik = j.value("loglik", 0.0);
    if (fit.alphas.empty() || fit.betas.size() != fit.alphas.size()) throw IoError("discrete fit shapes are inconsistent");
    for (std::size_t i = 1; i < fit.alphas.size(); ++i)
      if (fit.alphas[i] < fit.alphas[i - 1]) throw IoError("discrete fit intercepts must be non-decreasing");
    return fit;
  });
}

Json synthetic_spec_to_json(const SyntheticSpec& spec) {
  return Json{{"n", spec.n},   {"j_max", spec.j_max}, {"m1", spec.m1}, {"m2", spec.m2},
              {"covariate_law", to_string(spec.law)}, {"seed", spec.seed}};
}

SyntheticSpec synthetic_spec_from_json(const Json& j) {
  return parse_guard([&] {
    SyntheticSpec spec;
    spec.n = j.at("n").get<std::size_t>();
    spec.j_max = j.at("j_max").get<double>();
    spec.m1 = j.at("m1").get<double>();
    spec.m2 = j.at("m2").get<double>();
    spec.law = parse_covariate_law(j.at("covariate_law").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
  });
}

Json mse_report_to_json(const MseReport& rep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json summary = Json::array();
    for (const auto& s : r.summary) summary.push_back({{"median", s.median}, {"trimmed_sd", s.trimmed_sd}});
    rows.push_back({{"method", r.method}, {"response", r.response}, {"mse", r.mse}, {"summary", summary}});
  }
  return Json{{"spec", synthetic_spec_to_json(rep.spec)},
              {"grid", {{"start", rep.grid.start}, {"stop", rep.grid.stop}, {"step", rep.grid.step}}},
              {"replicates", rep.replicates},
              {"rows", rows}};
}

void write_mse_report_csv(std::ostream& out, const MseReport& rep) {
  out << "method,response,replicate,coordinate,mse\n" << std::setprecision(17);
  for (const auto& r : rep.rows)
    for (std::size_t i = 0; i < r.mse.size(); ++i)
      for (std::size_t k = 0; k < r.mse[i].size(); ++k)
        out << r.method << ',' << r.response << ',' << i << ',' << k + 1 << ',' << r.mse[i][k] << '\n';
}

void print_mse_table(std::ostream& out, const MseReport& rep) {
  out << "setting m1=" << rep.spec.m1 << " m2=" << rep.spec.m2 << ", n=" << rep.spec.n
      << ", replicates=" << rep.replicates << "\n";
  out << std::left << std::setw(8) << "model" << std::setw(12) << "response";
  const std::size_t dims = rep.rows.empty() ? 0 : rep.rows.front().summary.size();
  for (std::size_t k = 0; k < dims; ++k) out << std::setw(20) << ("MSE(b" + std::to_string(k + 1) + ")");
  out << '\n';
  for (const auto& r : rep.rows) {
    out << std::left << std::setw(8) << r.method << std::setw(12) << r.response;
    for (const auto& s : r.summary) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << s.median << " (" << s.trimmed_sd << ")";
      out << std::setw(20) << cell.str();
    }
    out << '\n';
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void save_model(const std::filesystem::path& path, const Model& m) { write_json(path, model_to_json(m)); }

Model load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

}  // namespace n3pom
