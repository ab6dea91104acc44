#include "n3pom/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "n3pom/errors.hpp"

namespace n3pom {

namespace {

// Stream ids per row: covariates, response, perturbation.
constexpr std::uint64_t kCovariateStream = 0;
constexpr std::uint64_t kResponseStream = 1;
constexpr std::uint64_t kPerturbStream = 2;

std::uint64_t stream_id(std::size_t row, std::uint64_t kind) { return (static_cast<std::uint64_t>(row) << 2) | kind; }

}  // namespace

double Dataset::max_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double s = 0.0;
    for (double v : row(i)) s += v * v;
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

Dataset Dataset::with_responses(std::vector<double> responses) const {
  if (responses.size() != size()) throw ConfigError("response vector length does not match dataset");
  Dataset out = *this;
  out.h = std::move(responses);
  return out;
}

std::string to_string(CovariateLaw law) { return law == CovariateLaw::disk_uniform ? "disk_uniform" : "beta_half"; }

CovariateLaw parse_covariate_law(std::string_view name) {
  if (name == "disk_uniform") return CovariateLaw::disk_uniform;
  if (name == "beta_half") return CovariateLaw::beta_half;
  throw ConfigError("unknown covariate law '" + std::string(name) + "'");
}

void SyntheticSpec::validate() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (!(j_max > 1.0)) throw ConfigError("J must exceed 1");
}

double true_intercept(double u) { return 2.0 * u - 9.0; }

std::array<double, 2> true_coefficients(double m1, double m2, double u) {
  return {-1.0 + m1 * u * u, 1.0 + m2 * u * u};
}

double true_predictor(std::span<const double> x, double m1, double m2, double u) {
  const auto b = true_coefficients(m1, m2, u);
  return true_intercept(u) + b[0] * x[0] + b[1] * x[1];
}

std::vector<double> sample_covariates(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<double> x(spec.n * 2);
  for (std::size_t i = 0; i < spec.n; ++i) {
    CounterRng rng(spec.seed, stream_id(i, kCovariateStream));
    if (spec.law == CovariateLaw::disk_uniform) {
      const double r = rng.uniform();
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      x[2 * i] = r * std::cos(theta);
      x[2 * i + 1] = r * std::sin(theta);
    } else {
      // Beta(1/2, 1/2) is the arcsine law: sin^2(pi U / 2).
      for (std::size_t k = 0; k < 2; ++k) {
        const double s = std::sin(0.5 * std::numbers::pi * rng.uniform());
        x[2 * i + k] = s * s;
      }
    }
  }
  return x;
}

double solve_response(std::span<const double> x, double m1, double m2, double j_max, double u01) {
  const double target = std::log(u01) - std::log1p(-u01);
  auto g = [&](double h) { return true_predictor(x, m1, m2, h) - target; };
  double lo = 1.0 - 2.0, hi = j_max + 2.0;
  double width = hi - lo;
  int doublings = 0;
  while (g(lo) > 0.0 || g(hi) < 0.0) {
    if (++doublings > 200) throw NumericError("response bracket expansion failed");
    if (g(lo) > 0.0) lo -= width;
    if (g(hi) < 0.0) hi += width;
    width *= 2.0;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double sample_response(std::span<const double> x, double m1, double m2, double j_max, CounterRng& rng) {
  const double u01 = rng.uniform();
  const double target = std::log(u01) - std::log1p(-u01);
  auto g = [&](double h) { return true_predictor(x, m1, m2, h) - target; };
  // Clamping the unrestricted root is the same as searching on [1, J] once
  // the endpoints are checked; it also avoids needing a root outside it.
  if (g(1.0) >= 0.0) return 1.0;
  if (g(j_max) <= 0.0) return j_max;
  double lo = 1.0, hi = j_max;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

int discretize(double h, int j_max) {
  const double r = std::floor(h + 0.5);
  return static_cast<int>(std::clamp(r, 1.0, static_cast<double>(j_max)));
}

double perturb_with(int g, double e, double j_max) { return std::clamp(g + e, 1.0, j_max); }

double perturb(int g, double j_max, CounterRng& rng) { return perturb_with(g, rng.uniform() - 0.5, j_max); }

std::vector<double> discretize_all(std::span<const double> h, double j_max) {
  std::vector<double> out(h.size());
  const int J = static_cast<int>(std::lround(j_max));
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = discretize(h[i], J);
  return out;
}

std::vector<double> perturb_all(std::span<const double> h, double j_max, std::uint64_t seed) {
  std::vector<double> out(h.size());
  const int J = static_cast<int>(std::lround(j_max));
  for (std::size_t i = 0; i < h.size(); ++i) {
    CounterRng rng(seed, stream_id(i, kPerturbStream));
    out[i] = perturb(discretize(h[i], J), j_max, rng);
  }
  return out;
}

SyntheticData generate(const SyntheticSpec& spec) {
  SyntheticData s;
  Dataset& d = s.data;
  d.dim = 2;
  d.j_max = spec.j_max;
  d.covariate_names = {"x1", "x2"};
  d.x = sample_covariates(spec);
  d.h.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    CounterRng rng(spec.seed, stream_id(i, kResponseStream));
    d.h[i] = sample_response(d.row(i), spec.m1, spec.m2, spec.j_max, rng);
  }
  s.rounded = discretize_all(d.h, spec.j_max);
  s.perturbed = perturb_all(d.h, spec.j_max, spec.seed);
  return s;
}

void write_synthetic_csv(const std::filesystem::path& path, const SyntheticData& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const Dataset& d = s.data;
  for (const auto& name : d.covariate_names) out << name << ',';
  out << "h,h_rounded,h_perturbed\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.row(i)) out << v << ',';
    out << d.h[i] << ',' << s.rounded[i] << ',' << s.perturbed[i] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "non-numeric value '" << cell << "' at row " << row << ", column '" << column << "'";
    throw IoError(msg.str());
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts, std::span<const std::string> ignore) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header row");

  std::vector<std::string> header;
  for (auto name : split(line)) header.emplace_back(name);
  const auto resp_it = std::find(header.begin(), header.end(), opts.response_column);
  if (resp_it == header.end()) throw IoError(path.string() + ": missing response column '" + opts.response_column + "'");
  const auto resp_col = static_cast<std::size_t>(resp_it - header.begin());

  std::vector<std::size_t> cov_cols;
  Dataset d;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == resp_col || std::find(ignore.begin(), ignore.end(), header[c]) != ignore.end()) continue;
    cov_cols.push_back(c);
    d.covariate_names.push_back(header[c]);
  }
  d.dim = cov_cols.size();

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << path.string() << ": row " << row << " has " << cells.size() << " cells, expected " << header.size();
      throw IoError(msg.str());
    }
    d.h.push_back(parse_cell(cells[resp_col], row, header[resp_col]));
    for (std::size_t c : cov_cols) d.x.push_back(parse_cell(cells[c], row, header[c]));
  }
  if (d.h.empty()) throw IoError(path.string() + ": no data rows");

  const auto [lo_it, hi_it] = std::minmax_element(d.h.begin(), d.h.end());
  const double lo = *lo_it, hi = *hi_it;
  if (opts.rescale) {
    if (!(hi > lo)) throw IoError(path.string() + ": response column '" + opts.response_column + "' is constant");
    if (!(opts.j_max > 1.0)) throw ConfigError("j_max must exceed 1");
    d.j_max = opts.j_max;
    d.rescale = {lo, (opts.j_max - 1.0) / (hi - lo)};
    for (double& h : d.h) h = std::clamp(d.rescale.forward(h), 1.0, opts.j_max);
  } else {
    d.j_max = opts.j_max;
    if (lo < 1.0 || hi > opts.j_max) {
      std::ostringstream msg;
      msg << path.string() << ": responses span [" << lo << ", " << hi << "], outside [1, " << opts.j_max
          << "]; enable rescaling";
      throw IoError(msg.str());
    }
  }

  if (opts.standardize) {
    const std::size_t n = d.size();
    d.standardize.resize(d.dim);
    for (std::size_t k = 0; k < d.dim; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += d.x[i * d.dim + k];
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += (d.x[i * d.dim + k] - mean) * (d.x[i * d.dim + k] - mean);
      const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
      if (!(sd > 0.0)) throw IoError(path.string() + ": covariate column '" + d.covariate_names[k] + "' is constant");
      d.standardize[k] = {mean, sd};
      for (std::size_t i = 0; i < n; ++i) d.x[i * d.dim + k] = (d.x[i * d.dim + k] - mean) / sd;
    }
  }
  return d;
}

}  // namespace n3pom
