#include "permext/lsqfit.hpp"

#include <algorithm>
#include <boost/math/interpolators/makima.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "permext/errors.hpp"
#include "permext/quadop.hpp"

namespace permext {

void ExperimentalData::validate() const {
  if (grid.empty()) throw GridError("ExperimentalData: empty grid");
  if (values.size() != grid.size()) throw GridError("ExperimentalData: grid and values differ in length");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) throw GridError("ExperimentalData: grid must lie in [0, 1]");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw GridError("ExperimentalData: grid must be strictly increasing");
    if (!std::isfinite(values[k].real()) || !std::isfinite(values[k].imag()))
      throw GridError("ExperimentalData: non-finite value");
  }
  if (!weights.empty() && weights.size() != grid.size()) throw GridError("ExperimentalData: weight count mismatch");
  for (double w : weights)
    if (!(w > 0.0)) throw GridError("ExperimentalData: weights must be positive");
}

ExperimentalData band_samples(const Evaluator& f, int n) {
  const Quadrature q = gauss_legendre(n, 0.0, 1.0);
  ExperimentalData d;
  d.grid = q.nodes;
  d.weights = q.weights;
  for (double x : d.grid) d.values.push_back(f(cplx(x, 0.0)));
  return d;
}

bool attach_gauss_rule(ExperimentalData& data) {
  const int n = static_cast<int>(data.grid.size());
  if (n < 1) return false;
  const Quadrature q = gauss_legendre(n, 0.0, 1.0);
  for (int k = 0; k < n; ++k)
    if (std::abs(q.nodes[k] - data.grid[k]) > 1e-12) return false;
  data.weights = q.weights;
  return true;
}

ExperimentalData resample_to_band_rule(const ExperimentalData& data, int n) {
  data.validate();
  if (data.grid.size() < 4) throw GridError("resample_to_band_rule: need at least 4 samples");
  std::vector<double> x1(data.grid), x2(data.grid), re, im;
  for (const cplx& v : data.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  using boost::math::interpolators::makima;
  const auto fr = makima<std::vector<double>>(std::move(x1), std::move(re));
  const auto fi = makima<std::vector<double>>(std::move(x2), std::move(im));
  const Quadrature q = gauss_legendre(n, data.grid.front(), data.grid.back());
  ExperimentalData out;
  out.grid = q.nodes;
  out.weights = q.weights;
  out.noise_level = data.noise_level;
  for (double x : out.grid) out.values.emplace_back(fr(x), fi(x));
  return out;
}

ExperimentalData synthesize_data(const StieltjesRational& truth, const std::vector<double>& grid, double noise_sigma,
                                 std::uint64_t seed, const std::vector<double>& weights) {
  if (noise_sigma < 0.0) throw RangeError("synthesize_data: negative noise level");
  ExperimentalData d;
  d.grid = grid;
  d.weights = weights;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, noise_sigma / std::sqrt(2.0));
  for (double x : grid) {
    cplx v = truth(cplx(x, 0.0));
    if (noise_sigma > 0.0) {
      const double a = nd(rng);
      const double b = nd(rng);
      v += cplx(a, b);
    }
    d.values.push_back(v);
  }
  if (noise_sigma > 0.0) d.noise_level = noise_sigma;
  d.validate();
  return d;
}

ExperimentalData synthesize_band_data(const StieltjesRational& truth, int n, double noise_sigma, std::uint64_t seed) {
  const Quadrature q = gauss_legendre(n, 0.0, 1.0);
  return synthesize_data(truth, q.nodes, noise_sigma, seed, q.weights);
}

namespace {

// Band rule with precomputed (x + ih)^2 and model residuals.
struct Band {
  std::vector<double> x, w;
  std::vector<cplx> fexp;
  std::vector<cplx> z2;  // (x + ih)^2
  double h = 0.0;
  double norm2 = 0.0;    // ||f_exp||^2
};

Band make_band(const ExperimentalData& data, double h, int band_points) {
  data.validate();
  const ExperimentalData d = data.has_rule() ? data : resample_to_band_rule(data, band_points);
  Band b;
  b.x = d.grid;
  b.w = d.weights;
  b.fexp = d.values;
  b.h = h;
  for (std::size_t k = 0; k < b.x.size(); ++k) {
    const cplx z(b.x[k], h);
    b.z2.push_back(z * z);
    b.norm2 += b.w[k] * std::norm(b.fexp[k]);
  }
  return b;
}

Band make_band(const StieltjesRational& model, const ExperimentalData& data) {
  return make_band(data, model.h(), 200);
}

std::vector<cplx> residuals(double rho, const std::vector<double>& t, const std::vector<double>& s, const Band& b) {
  std::vector<cplx> r(b.x.size());
  for (std::size_t k = 0; k < b.x.size(); ++k) {
    cplx f = rho;
    for (std::size_t j = 0; j < t.size(); ++j) f += s[j] / (t[j] - b.z2[k]);
    r[k] = f - b.fexp[k];
  }
  return r;
}

double energy(const std::vector<cplx>& r, const Band& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) e += b.w[k] * std::norm(r[k]);
  return e;
}

// Caprini function in terms of the band residual r = f - f_exp.
double caprini(const std::vector<cplx>& r, const Band& b, double t) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) s += b.w[k] * r[k] / (t - std::conj(b.z2[k]));
  return 2.0 * s.real();
}

double caprini_d(const std::vector<cplx>& r, const Band& b, double t) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const cplx d = t - std::conj(b.z2[k]);
    s += b.w[k] * r[k] / (d * d);
  }
  return -2.0 * s.real();
}

double tail_exact(const std::vector<cplx>& r, const Band& b) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) s += b.w[k] * r[k];
  return 2.0 * s.real();
}

std::vector<cplx> model_residuals(const StieltjesRational& m, const Band& b) {
  return residuals(m.rho_star(), m.nodes(), m.masses(), b);
}

CapriniCertificate certify_band(const StieltjesRational& model, const Band& b, const std::vector<double>& t_grid,
                                double rel_tol) {
  const std::vector<cplx> r = model_residuals(model, b);
  CapriniCertificate c;
  c.t_grid = t_grid;
  c.tol = rel_tol * b.norm2;
  c.min_C = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const double v = caprini(r, b, t);
    c.C_values.push_back(v);
    if (v < c.min_C) {
      c.min_C = v;
      c.argmin_t = t;
    }
  }
  bool nodes_ok = true;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const double t = model.nodes()[j];
    c.node_values.push_back(std::abs(caprini(r, b, t)));
    nodes_ok = nodes_ok && c.node_values.back() <= c.tol;
    // At t = 0 the node sits on the boundary of the admissible set; C'(0) >= 0 suffices.
    const double d = caprini_d(r, b, t);
    c.node_derivatives.push_back(t > 0.0 ? std::abs(d) : std::max(-d, 0.0));
    nodes_ok = nodes_ok && c.node_derivatives.back() <= c.tol;
  }
  c.tail_exact = tail_exact(r, b);
  const std::size_t n = t_grid.size();
  if (n >= 3 && t_grid[n - 3] > 0.0) {
    // t C(t) = L + a/t + b/t^2 + ...; interpolate in s = 1/t and evaluate at s = 0.
    Eigen::Matrix3d M;
    Eigen::Vector3d y;
    for (int i = 0; i < 3; ++i) {
      const double t = t_grid[n - 3 + i], s = 1.0 / t;
      M(i, 0) = 1.0;
      M(i, 1) = s;
      M(i, 2) = s * s;
      y(i) = t * c.C_values[n - 3 + i];
    }
    c.tail_limit = M.fullPivLu().solve(y)(0);
  } else {
    c.tail_limit = c.tail_exact;
  }
  const bool tail_ok = !(model.rho_star() > 0.0) || std::abs(c.tail_limit) <= c.tol;
  c.ok = c.min_C >= -c.tol && nodes_ok && tail_ok;
  return c;
}

std::vector<double> log_t_grid(double t_max, int n) {
  std::vector<double> g{0.0};
  const double lo = std::log10(t_max) - 10.0;
  for (int k = 0; k < n; ++k) g.push_back(std::pow(10.0, lo + (std::log10(t_max) - lo) * k / (n - 1)));
  return g;
}

}  // namespace

double squared_residual(const StieltjesRational& model, const ExperimentalData& data) {
  const Band b = make_band(model, data);
  return energy(model_residuals(model, b), b);
}

double caprini_function(const StieltjesRational& model, const ExperimentalData& data, double t) {
  if (t < 0.0) throw RangeError("caprini_function: t must be nonnegative");
  const Band b = make_band(model, data);
  return caprini(model_residuals(model, b), b, t);
}

double caprini_derivative(const StieltjesRational& model, const ExperimentalData& data, double t) {
  if (t < 0.0) throw RangeError("caprini_derivative: t must be nonnegative");
  const Band b = make_band(model, data);
  return caprini_d(model_residuals(model, b), b, t);
}

double caprini_tail_exact(const StieltjesRational& model, const ExperimentalData& data) {
  const Band b = make_band(model, data);
  return tail_exact(model_residuals(model, b), b);
}

std::vector<double> default_t_grid(const StieltjesRational& model, int n) {
  double tmax = 1.0;
  for (double t : model.nodes()) tmax = std::max(tmax, t);
  return log_t_grid(1e4 * tmax, n);
}

CapriniCertificate certify(const StieltjesRational& model, const ExperimentalData& data,
                           const std::vector<double>& t_grid, double rel_tol) {
  if (t_grid.empty()) throw RangeError("certify: empty t grid");
  for (std::size_t k = 0; k < t_grid.size(); ++k)
    if (t_grid[k] < 0.0 || (k > 0 && !(t_grid[k] > t_grid[k - 1])))
      throw RangeError("certify: t grid must be nonnegative and increasing");
  return certify_band(model, make_band(model, data), t_grid, rel_tol);
}

CapriniCertificate certify(const StieltjesRational& model, const ExperimentalData& data) {
  return certify(model, data, default_t_grid(model));
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
  const Eigen::Index n = A.cols();
  if (A.rows() != b.size()) throw RangeError("nnls: dimension mismatch");
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 30);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  Eigen::VectorXd w = A.transpose() * (b - A * x);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.norm() * std::max(b.norm(), 1e-300) *
                     static_cast<double>(std::max(A.rows(), n));
  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) Ap.col(i) = A.col(idx[i]);
    const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
    z.setZero(n);
    for (std::size_t i = 0; i < idx.size(); ++i) z(idx[i]) = zp(i);
  };
  for (int outer = 0; outer < max_iter; ++outer) {
    Eigen::Index jmax = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > wmax) {
        wmax = w(j);
        jmax = j;
      }
    if (jmax < 0) break;
    passive[jmax] = true;
    Eigen::VectorXd z;
    for (int inner = 0; inner < 3 * n + 30; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && x(j) <= 1e-300) {
          passive[j] = false;
          x(j) = 0.0;
        }
    }
    x = z;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j]) x(j) = 0.0;
    w = A.transpose() * (b - A * x);
  }
  return x;
}

namespace {

struct Model {
  double rho = 0.0;
  std::vector<double> t, s;
};

StieltjesRational to_rational(const Model& m, double h) {
  std::vector<std::size_t> order(m.t.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.t[a] < m.t[b]; });
  std::vector<double> t, s;
  for (std::size_t i : order) {
    if (!(m.s[i] > 0.0)) continue;
    if (!t.empty() && m.t[i] <= t.back()) {
      s.back() += m.s[i];
      continue;
    }
    t.push_back(m.t[i]);
    s.push_back(m.s[i]);
  }
  return StieltjesRational(std::max(m.rho, 0.0), h, std::move(t), std::move(s));
}

double model_energy(const Model& m, const Band& b) { return energy(residuals(m.rho, m.t, m.s, b), b); }

// Optimal (rho, sigma) >= 0 at fixed nodes; drops nodes with zero weight.
void weights_by_nnls(Model& m, const Band& b) {
  const Eigen::Index nk = static_cast<Eigen::Index>(b.x.size());
  const Eigen::Index nc = 1 + static_cast<Eigen::Index>(m.t.size());
  Eigen::MatrixXd A(2 * nk, nc);
  Eigen::VectorXd rhs(2 * nk);
  for (Eigen::Index k = 0; k < nk; ++k) {
    const double sw = std::sqrt(b.w[k]);
    A(2 * k, 0) = sw;
    A(2 * k + 1, 0) = 0.0;
    for (std::size_t j = 0; j < m.t.size(); ++j) {
      const cplx v = 1.0 / (m.t[j] - b.z2[k]);
      A(2 * k, j + 1) = sw * v.real();
      A(2 * k + 1, j + 1) = sw * v.imag();
    }
    rhs(2 * k) = sw * b.fexp[k].real();
    rhs(2 * k + 1) = sw * b.fexp[k].imag();
  }
  const Eigen::VectorXd scale = A.colwise().norm().cwiseMax(1e-300).cwiseInverse();
  const Eigen::VectorXd y = nnls(A * scale.asDiagonal(), rhs);
  const Eigen::VectorXd x = scale.cwiseProduct(y);
  m.rho = x(0);
  Model out;
  out.rho = m.rho;
  for (std::size_t j = 0; j < m.t.size(); ++j)
    if (x(j + 1) > 0.0) {
      out.t.push_back(m.t[j]);
      out.s.push_back(x(j + 1));
    }
  m = out;
}

// Projected Levenberg-Marquardt on (rho, sigma, t); only decreasing steps are taken.
void polish(Model& m, const Band& b, int max_iter = 300) {
  const std::size_t nm = m.t.size();
  const std::size_t nk = b.x.size();
  double E = model_energy(m, b);
  double mu = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    const std::vector<cplx> r = residuals(m.rho, m.t, m.s, b);
    const Eigen::Index np = static_cast<Eigen::Index>(1 + 2 * nm);
    Eigen::MatrixXd J(2 * nk, np);
    Eigen::VectorXd R(2 * nk);
    for (std::size_t k = 0; k < nk; ++k) {
      const double sw = std::sqrt(b.w[k]);
      R(2 * k) = sw * r[k].real();
      R(2 * k + 1) = sw * r[k].imag();
      J(2 * k, 0) = sw;
      J(2 * k + 1, 0) = 0.0;
      for (std::size_t j = 0; j < nm; ++j) {
        const cplx d = 1.0 / (m.t[j] - b.z2[k]);
        const cplx dt = -m.s[j] * d * d;
        J(2 * k, 1 + j) = sw * d.real();
        J(2 * k + 1, 1 + j) = sw * d.imag();
        J(2 * k, 1 + nm + j) = sw * dt.real();
        J(2 * k + 1, 1 + nm + j) = sw * dt.imag();
      }
    }
    const Eigen::VectorXd g = J.transpose() * R;
    // Freeze variables pinned at a bound by an outward gradient.
    std::vector<Eigen::Index> freev;
    if (m.rho > 0.0 || g(0) < 0.0) freev.push_back(0);
    for (std::size_t j = 0; j < nm; ++j) {
      freev.push_back(static_cast<Eigen::Index>(1 + j));
      if (m.t[j] > 0.0 || g(1 + nm + j) < 0.0) freev.push_back(static_cast<Eigen::Index>(1 + nm + j));
    }
    const Eigen::Index nf = static_cast<Eigen::Index>(freev.size());
    Eigen::MatrixXd Jf(J.rows(), nf);
    for (Eigen::Index i = 0; i < nf; ++i) Jf.col(i) = J.col(freev[i]);
    const Eigen::MatrixXd H = Jf.transpose() * Jf;
    const Eigen::VectorXd gf = Jf.transpose() * R;
    if (gf.norm() <= 1e-300) return;
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd Hd = H;
      for (Eigen::Index i = 0; i < nf; ++i) Hd(i, i) += mu * std::max(H(i, i), 1e-300);
      const Eigen::VectorXd step = Hd.ldlt().solve(-gf);
      Model trial = m;
      for (Eigen::Index i = 0; i < nf; ++i) {
        const Eigen::Index v = freev[i];
        if (v == 0)
          trial.rho = std::max(trial.rho + step(i), 0.0);
        else if (v <= static_cast<Eigen::Index>(nm))
          trial.s[v - 1] = std::max(trial.s[v - 1] + step(i), 0.0);
        else
          trial.t[v - 1 - nm] = std::max(trial.t[v - 1 - nm] + step(i), 0.0);
      }
      const double Et = model_energy(trial, b);
      if (Et < E) {
        const double rel = (E - Et) / std::max(E, 1e-300);
        m = trial;
        E = Et;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (rel < 1e-15) return;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) return;
  }
}

void drop_empty(Model& m) {
  Model out;
  out.rho = m.rho;
  for (std::size_t j = 0; j < m.t.size(); ++j)
    if (m.s[j] > 0.0) {
      out.t.push_back(m.t[j]);
      out.s.push_back(m.s[j]);
    }
  m = out;
}

void sort_nodes(Model& m) {
  std::vector<std::size_t> o(m.t.size());
  std::iota(o.begin(), o.end(), 0);
  std::sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return m.t[a] < m.t[b]; });
  Model out;
  out.rho = m.rho;
  for (std::size_t i : o) {
    out.t.push_back(m.t[i]);
    out.s.push_back(m.s[i]);
  }
  m = out;
}

// Argmin of C over the grid, refined between the neighbouring grid points.
std::pair<double, double> caprini_argmin(const std::vector<cplx>& r, const Band& b, const std::vector<double>& grid) {
  std::size_t imin = 0;
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = caprini(r, b, grid[i]);
    if (v < vmin) {
      vmin = v;
      imin = i;
    }
  }
  const double lo = grid[imin > 0 ? imin - 1 : 0];
  const double hi = grid[std::min(imin + 1, grid.size() - 1)];
  if (hi > lo) {
    const auto res = boost::math::tools::brent_find_minima([&](double t) { return caprini(r, b, t); }, lo, hi, 50);
    if (res.second < vmin) return {res.first, res.second};
  }
  return {grid[imin], vmin};
}

}  // namespace

FitResult fit_stieltjes(const ExperimentalData& data, double h, const FitOptions& opts) {
  if (!(h > 0.0)) throw RangeError("fit_stieltjes: h must be positive");
  const Band b = make_band(data, h, opts.band_points);
  double vmax = 0.0;
  for (const cplx& v : b.fexp) vmax = std::max(vmax, std::abs(v));
  if (!(vmax > 1e-300) || b.norm2 <= 0.0) throw DomainError("fit_stieltjes: data vanish identically");
  const double tol = opts.rel_tol * b.norm2;
  const std::vector<double> grid = log_t_grid(opts.t_max, opts.n_t_grid);

  Model m;
  m.t = opts.initial_nodes;
  std::sort(m.t.begin(), m.t.end());
  m.t.erase(std::unique(m.t.begin(), m.t.end()), m.t.end());
  for (double t : m.t)
    if (t < 0.0) throw RangeError("fit_stieltjes: initial nodes must be nonnegative");
  m.s.assign(m.t.size(), 0.0);
  weights_by_nnls(m, b);

  FitResult res;
  double E = model_energy(m, b);
  res.history.push_back(std::sqrt(E));
  auto record = [&](const Model& cand) {
    const double Ec = model_energy(cand, b);
    if (Ec <= E) {
      m = cand;
      E = Ec;
      res.history.push_back(std::sqrt(E));
      return true;
    }
    return false;
  };

  int stall = 0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    {
      Model c = m;
      polish(c, b);
      drop_empty(c);
      weights_by_nnls(c, b);
      record(c);
    }
    // Merge nodes that have drifted together.
    sort_nodes(m);
    for (std::size_t j = 0; j + 1 < m.t.size(); ++j) {
      if (m.t[j + 1] - m.t[j] > 1e-2 * (1.0 + m.t[j + 1])) continue;
      Model c = m;
      const double s = c.s[j] + c.s[j + 1];
      c.t[j] = (c.s[j] * c.t[j] + c.s[j + 1] * c.t[j + 1]) / s;
      c.s[j] = s;
      c.t.erase(c.t.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      c.s.erase(c.s.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      polish(c, b);
      drop_empty(c);
      if (record(c)) break;
    }

    // Iterate against a tighter internal tolerance so the reported certificate has margin.
    const StieltjesRational cur = to_rational(m, h);
    if (certify_band(cur, b, default_t_grid(cur), 0.1 * opts.rel_tol).ok) break;
    const std::vector<cplx> r = residuals(m.rho, m.t, m.s, b);
    const auto [targ, cmin] = caprini_argmin(r, b, grid);
    const double E_before = E;
    if (cmin < -0.01 * tol && static_cast<int>(m.t.size()) < opts.max_nodes) {
      Model c = m;
      c.t.push_back(targ);
      c.s.push_back(0.0);
      weights_by_nnls(c, b);
      record(c);
    }
    stall = E < E_before * (1.0 - 1e-14) ? 0 : stall + 1;
    if (stall >= 5) break;
  }
  res.model = to_rational(m, h);
  res.residual = std::sqrt(E);
  res.certificate = certify_band(res.model, b, default_t_grid(res.model), opts.rel_tol);
  res.converged = res.certificate.ok;
  return res;
}

VariationCheck variation_identity_check(const StieltjesRational& model, const StieltjesRational& competitor,
                                        const ExperimentalData& data) {
  if (model.h() != competitor.h()) throw RangeError("variation_identity_check: models use different h");
  const Band b = make_band(model, data);
  const std::vector<cplx> r = model_residuals(model, b);
  const std::vector<cplx> rc = model_residuals(competitor, b);
  VariationCheck v;
  v.lhs = energy(rc, b) - energy(r, b);
  v.delta_rho_term = (competitor.rho_star() - model.rho_star()) * tail_exact(r, b);
  // nu = sigma_competitor - sigma_model as a signed atomic measure.
  for (std::size_t j = 0; j < competitor.size(); ++j)
    v.measure_term += competitor.masses()[j] * caprini(r, b, competitor.nodes()[j]);
  for (std::size_t j = 0; j < model.size(); ++j) v.measure_term -= model.masses()[j] * caprini(r, b, model.nodes()[j]);
  std::vector<cplx> phi(b.x.size());
  for (std::size_t k = 0; k < b.x.size(); ++k) phi[k] = rc[k] - r[k];
  v.phi_norm2 = energy(phi, b);
  v.rhs = v.delta_rho_term + v.measure_term + v.phi_norm2;
  return v;
}

}  // namespace permext
