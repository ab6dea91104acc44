#include "n3pom/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "n3pom/errors.hpp"

namespace n3pom {

namespace {

struct Layout {
  std::size_t R, dL, d;
  std::size_t varphi() const { return 1; }
  std::size_t w1() const { return R; }
  std::size_t v1() const { return R + dL; }
  std::size_t w2() const { return R + 2 * dL; }
  std::size_t v2() const { return R + 3 * dL; }
  std::size_t total() const { return R + 3 * dL + d; }
};

Layout layout_of(const Model& m) {
  return {m.intercept.num_knots(), m.net.dim * m.net.hidden, m.net.dim};
}

// Minimum batch size before the per-sample loop is worth forking.
constexpr std::size_t kParallelThreshold = 64;

// Writes zeta * grad log q(h | x) into out (flat layout). Returns false when
// f'_h(x) < 0.
bool sample_term(const Model& m, const Layout& lay, double h, std::span<const double> x, double zeta,
                 std::span<double> out) {
  const auto& p = m.intercept;
  const auto& net = m.net;
  const std::size_t cell = p.cell_of(h);

  double f = eval_a(p, h);
  double fp = std::fabs(p.varphi[cell]) / (p.knots[cell + 1] - p.knots[cell]);
  for (std::size_t k = 0; k < net.dim; ++k) {
    double bk = net.v2[k], dbk = 0.0;
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      const double z = net.w1[i] * h + net.v1[i];
      bk += net.w2[i] * activate(net.activation, z);
      dbk += net.w1[i] * net.w2[i] * activate_d1(net.activation, z);
    }
    f += bk * x[k];
    fp += dbk * x[k];
  }
  if (fp < 0.0) return false;

  // sigma''/sigma' simplifies to 1 - 2 sigma(f).
  const double A = zeta * (1.0 - 2.0 * sigmoid(f));
  const double B = zeta / std::max(fp, kDensityFloor);

  out[0] = A;
  for (std::size_t t = 0; t + 1 < p.num_knots(); ++t) {
    const double width = p.knots[t + 1] - p.knots[t];
    double g = A * clamp_unit((h - p.knots[t]) / width);
    if (t == cell) g += B / width;
    out[lay.varphi() + t] = sign_of(p.varphi[t]) * g;
  }
  for (std::size_t k = 0; k < net.dim; ++k) {
    const double xk = x[k];
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      const double w1 = net.w1[i], w2 = net.w2[i];
      const double z = w1 * h + net.v1[i];
      const double r0 = activate(net.activation, z);
      const double r1 = activate_d1(net.activation, z);
      const double r2 = activate_d2(net.activation, z);
      out[lay.w1() + i] = xk * w2 * (A * h * r1 + B * (w1 * h * r2 + r1));
      out[lay.v1() + i] = xk * w2 * (A * r1 + B * w1 * r2);
      out[lay.w2() + i] = xk * (A * r0 + B * w1 * r1);
    }
    out[lay.v2() + k] = A * xk;
  }
  return true;
}

ParamGradient from_flat(const Model& m, std::span<const double> flat) {
  const Layout lay = layout_of(m);
  ParamGradient g = ParamGradient::zeros_like(m);
  g.d_phi = flat[0];
  std::copy_n(flat.begin() + lay.varphi(), lay.R - 1, g.d_varphi.begin());
  std::copy_n(flat.begin() + lay.w1(), lay.dL, g.d_w1.begin());
  std::copy_n(flat.begin() + lay.v1(), lay.dL, g.d_v1.begin());
  std::copy_n(flat.begin() + lay.w2(), lay.dL, g.d_w2.begin());
  std::copy_n(flat.begin() + lay.v2(), lay.d, g.d_v2.begin());
  return g;
}

[[noreturn]] void throw_bad_sample(std::size_t row, double h) {
  std::ostringstream msg;
  msg << "negative density derivative at sample " << row << " (h = " << h << ")";
  throw NumericError(msg.str());
}

void check_batch(const Model& m, const Dataset& data, std::span<const std::size_t> batch,
                 std::span<const double> zeta) {
  if (data.dim != m.net.dim) throw DomainError("dataset dimension does not match model");
  if (zeta.size() != data.size()) throw ConfigError("zeta must have one weight per dataset row");
  for (std::size_t idx : batch) {
    if (idx >= data.size()) throw ConfigError("batch index out of range");
    m.intercept.cell_of(data.h[idx]);
  }
}

ParamGradient reduce_terms(const Model& m, const std::vector<double>& terms, std::size_t count,
                           std::size_t P) {
  std::vector<double> acc(P, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    const double* t = terms.data() + s * P;
    for (std::size_t j = 0; j < P; ++j) acc[j] += t[j];
  }
  return from_flat(m, acc);
}

double sample_loglik(const Model& m, double h, std::span<const double> x) {
  const double f = eval_f(m, h, x);
  const double fp = eval_f_deriv(m, h, x);
  return log_sigmoid_d1(f) + std::log(std::max(fp, kDensityFloor));
}

}  // namespace

// ---------------------------------------------------------------------------

ParamGradient ParamGradient::zeros_like(const Model& m) {
  ParamGradient g;
  const std::size_t dL = m.net.dim * m.net.hidden;
  g.d_varphi.assign(m.intercept.num_knots() - 1, 0.0);
  g.d_w1.assign(dL, 0.0);
  g.d_v1.assign(dL, 0.0);
  g.d_w2.assign(dL, 0.0);
  g.d_v2.assign(m.net.dim, 0.0);
  return g;
}

std::vector<double> ParamGradient::flat() const {
  std::vector<double> out;
  out.reserve(1 + d_varphi.size() + 3 * d_w1.size() + d_v2.size());
  out.push_back(d_phi);
  for (const auto* v : {&d_varphi, &d_w1, &d_v1, &d_w2, &d_v2}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

void ParamGradient::add_scaled(const ParamGradient& other, double s) {
  d_phi += s * other.d_phi;
  auto axpy = [s](std::vector<double>& y, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
  };
  axpy(d_varphi, other.d_varphi);
  axpy(d_w1, other.d_w1);
  axpy(d_v1, other.d_v1);
  axpy(d_w2, other.d_w2);
  axpy(d_v2, other.d_v2);
}

void ParamGradient::scale(double s) {
  d_phi *= s;
  for (auto* v : {&d_varphi, &d_w1, &d_v1, &d_w2, &d_v2})
    for (double& e : *v) e *= s;
}

double ParamGradient::norm() const {
  double acc = d_phi * d_phi;
  for (const auto* v : {&d_varphi, &d_w1, &d_v1, &d_w2, &d_v2})
    for (double e : *v) acc += e * e;
  return std::sqrt(acc);
}

bool ParamGradient::all_finite() const {
  if (!std::isfinite(d_phi)) return false;
  for (const auto* v : {&d_varphi, &d_w1, &d_v1, &d_w2, &d_v2})
    for (double e : *v)
      if (!std::isfinite(e)) return false;
  return true;
}

std::size_t num_params(const Model& m) { return layout_of(m).total(); }

std::vector<double> pack_params(const Model& m) {
  std::vector<double> out;
  out.reserve(num_params(m));
  out.push_back(m.intercept.phi);
  for (const auto* v : {&m.intercept.varphi, &m.net.w1, &m.net.v1, &m.net.w2, &m.net.v2})
    out.insert(out.end(), v->begin(), v->end());
  return out;
}

void unpack_params(Model& m, std::span<const double> theta) {
  if (theta.size() != num_params(m)) throw ConfigError("parameter vector has the wrong length");
  auto it = theta.begin();
  m.intercept.phi = *it++;
  for (auto* v : {&m.intercept.varphi, &m.net.w1, &m.net.v1, &m.net.w2, &m.net.v2}) {
    std::copy_n(it, v->size(), v->begin());
    it += static_cast<std::ptrdiff_t>(v->size());
  }
}

void apply_step(Model& m, const ParamGradient& g, double step) {
  m.intercept.phi += step * g.d_phi;
  auto axpy = [step](std::vector<double>& y, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += step * x[i];
  };
  axpy(m.intercept.varphi, g.d_varphi);
  axpy(m.net.w1, g.d_w1);
  axpy(m.net.v1, g.d_v1);
  axpy(m.net.w2, g.d_w2);
  axpy(m.net.v2, g.d_v2);
}

double clamp_unit(double z) { return z < 0.0 ? 0.0 : (z > 1.0 ? 1.0 : z); }

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

ParamGradient grad_f(const Model& m, double u, std::span<const double> x) {
  if (x.size() != m.net.dim) throw DomainError("covariate dimension mismatch");
  const auto& p = m.intercept;
  const auto& net = m.net;
  p.cell_of(u);
  ParamGradient g = ParamGradient::zeros_like(m);
  g.d_phi = 1.0;
  for (std::size_t t = 0; t + 1 < p.num_knots(); ++t)
    g.d_varphi[t] = sign_of(p.varphi[t]) * clamp_unit((u - p.knots[t]) / (p.knots[t + 1] - p.knots[t]));
  for (std::size_t k = 0; k < net.dim; ++k) {
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      const double z = net.w1[i] * u + net.v1[i];
      const double r1 = activate_d1(net.activation, z);
      g.d_v1[i] = x[k] * net.w2[i] * r1;
      g.d_w1[i] = x[k] * net.w2[i] * u * r1;
      g.d_w2[i] = x[k] * activate(net.activation, z);
    }
    g.d_v2[k] = x[k];
  }
  return g;
}

ParamGradient grad_f_deriv(const Model& m, double u, std::span<const double> x) {
  if (x.size() != m.net.dim) throw DomainError("covariate dimension mismatch");
  const auto& p = m.intercept;
  const auto& net = m.net;
  const std::size_t cell = p.cell_of(u);
  ParamGradient g = ParamGradient::zeros_like(m);
  g.d_varphi[cell] = sign_of(p.varphi[cell]) / (p.knots[cell + 1] - p.knots[cell]);
  for (std::size_t k = 0; k < net.dim; ++k) {
    for (std::size_t l = 0; l < net.hidden; ++l) {
      const std::size_t i = net.index(k, l);
      const double w1 = net.w1[i], w2 = net.w2[i];
      const double z = w1 * u + net.v1[i];
      const double r1 = activate_d1(net.activation, z);
      const double r2 = activate_d2(net.activation, z);
      g.d_v1[i] = x[k] * w2 * w1 * r2;
      g.d_w1[i] = x[k] * w2 * w1 * u * r2 + x[k] * w2 * r1;
      g.d_w2[i] = x[k] * w1 * r1;
    }
  }
  return g;
}

ParamGradient grad_loglik(const Model& m, const Dataset& data, std::span<const std::size_t> batch,
                          std::span<const double> zeta) {
  check_batch(m, data, batch, zeta);
  const Layout lay = layout_of(m);
  const std::size_t P = lay.total();
  const std::size_t count = batch.size();
  std::vector<double> terms(count * P, 0.0);
  std::vector<char> ok(count, 1);
  const auto n = static_cast<std::ptrdiff_t>(count);

#pragma omp parallel for schedule(static) if (count >= kParallelThreshold)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const std::size_t row = batch[static_cast<std::size_t>(s)];
    ok[static_cast<std::size_t>(s)] = sample_term(m, lay, data.h[row], data.row(row), zeta[row],
                                                  {terms.data() + static_cast<std::size_t>(s) * P, P});
  }
  for (std::size_t s = 0; s < count; ++s)
    if (!ok[s]) throw_bad_sample(batch[s], data.h[batch[s]]);
  return reduce_terms(m, terms, count, P);
}

ParamGradient grad_loglik_serial(const Model& m, const Dataset& data, std::span<const std::size_t> batch,
                                 std::span<const double> zeta) {
  check_batch(m, data, batch, zeta);
  const Layout lay = layout_of(m);
  const std::size_t P = lay.total();
  std::vector<double> acc(P, 0.0), term(P);
  for (std::size_t row : batch) {
    if (!sample_term(m, lay, data.h[row], data.row(row), zeta[row], term)) throw_bad_sample(row, data.h[row]);
    for (std::size_t j = 0; j < P; ++j) acc[j] += term[j];
  }
  return from_flat(m, acc);
}

double full_loglik(const Model& m, const Dataset& data, std::span<const double> zeta) {
  if (zeta.size() != data.size()) throw ConfigError("zeta must have one weight per dataset row");
  const std::size_t n = data.size();
  if (data.dim != m.net.dim) throw DomainError("dataset dimension does not match model");
  for (double h : data.h) m.intercept.cell_of(h);
  std::vector<double> terms(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto r = static_cast<std::size_t>(i);
    terms[r] = zeta[r] == 0.0 ? 0.0 : zeta[r] * sample_loglik(m, data.h[r], data.row(r));
  }
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

double full_loglik_serial(const Model& m, const Dataset& data, std::span<const double> zeta) {
  if (zeta.size() != data.size()) throw ConfigError("zeta must have one weight per dataset row");
  double acc = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r)
    acc += zeta[r] == 0.0 ? 0.0 : zeta[r] * sample_loglik(m, data.h[r], data.row(r));
  return acc;
}

double batch_loglik(const Model& m, const Dataset& data, std::span<const std::size_t> batch,
                    std::span<const double> zeta) {
  double acc = 0.0;
  for (std::size_t r : batch) acc += zeta[r] * sample_loglik(m, data.h[r], data.row(r));
  return acc;
}

}  // namespace n3pom
