#include "permext/stieltjes.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "permext/errors.hpp"

namespace permext {

namespace {

constexpr double kPoleTol = 1e-12;

bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Coarse log-grid scan followed by Brent refinement around the best sample.
template <class F>
std::pair<double, double> minimize_on_log_axis(F&& f, double lo, double hi, int n_scan = 241) {
  const double a = std::log(lo), b = std::log(hi);
  double best_u = a, best_v = f(lo);
  for (int k = 1; k < n_scan; ++k) {
    const double u = a + (b - a) * k / (n_scan - 1);
    const double v = f(std::exp(u));
    if (v < best_v) {
      best_v = v;
      best_u = u;
    }
  }
  const double du = (b - a) / (n_scan - 1);
  const double l = std::max(a, best_u - du), r = std::min(b, best_u + du);
  auto g = [&](double u) { return f(std::exp(u)); };
  const auto res = boost::math::tools::brent_find_minima(g, l, r, 52);
  if (res.second < best_v) return {std::exp(res.first), res.second};
  return {std::exp(best_u), best_v};
}

}  // namespace

StieltjesRational::StieltjesRational(double rho_star, double h, std::vector<double> nodes,
                                     std::vector<double> masses)
    : rho_star_(rho_star), h_(h), nodes_(std::move(nodes)), masses_(std::move(masses)) {
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw DomainError("StieltjesRational: h must be positive");
  if (!(rho_star_ >= 0.0) || !std::isfinite(rho_star_))
    throw DomainError("StieltjesRational: rho_star must be nonnegative");
  if (nodes_.size() != masses_.size())
    throw DomainError("StieltjesRational: nodes and masses differ in length");
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    if (!(nodes_[j] >= 0.0) || !std::isfinite(nodes_[j]))
      throw DomainError("StieltjesRational: nodes must be nonnegative");
    if (!(masses_[j] > 0.0) || !std::isfinite(masses_[j]))
      throw DomainError("StieltjesRational: masses must be positive");
    if (j > 0 && !(nodes_[j] > nodes_[j - 1]))
      throw DomainError("StieltjesRational: nodes must be strictly increasing");
  }
}

cplx StieltjesRational::operator()(cplx omega) const { return eval_stieltjes(*this, omega); }

cplx eval_stieltjes(const StieltjesRational& f, cplx omega) {
  const double h = f.h();
  if (!(omega.imag() > -h)) throw DomainError("eval_stieltjes: Im(omega) <= -h");
  const cplx s = omega + cplx(0.0, h);
  const cplx z = s * s;
  cplx acc(f.rho_star(), 0.0);
  const auto& t = f.nodes();
  const auto& m = f.masses();
  for (std::size_t j = 0; j < t.size(); ++j) {
    const cplx d = t[j] - z;
    if (std::abs(d) < kPoleTol * (1.0 + std::abs(t[j])))
      throw PoleError("eval_stieltjes: omega too close to a pole");
    acc += m[j] / d;
  }
  return acc;
}

double dual_norm(const StieltjesRational& f) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f.masses()[j] / (f.nodes()[j] + 1.0);
  return s;
}

GridFunction::GridFunction(std::vector<cplx> g, std::vector<cplx> v)
    : grid(std::move(g)), values(std::move(v)) {
  validate();
}

GridFunction GridFunction::sample(const Evaluator& f, std::vector<cplx> g) {
  std::vector<cplx> v;
  v.reserve(g.size());
  for (const auto& w : g) v.push_back(f(w));
  return GridFunction(std::move(g), std::move(v));
}

void GridFunction::validate() const {
  if (grid.size() != values.size()) throw GridError("GridFunction: grid and values differ in length");
  std::vector<cplx> s = grid;
  auto lex = [](cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); };
  std::sort(s.begin(), s.end(), lex);
  for (std::size_t k = 1; k < s.size(); ++k)
    if (s[k] == s[k - 1]) throw GridError("GridFunction: repeated abscissa");
}

GridFunction apply_S(const GridFunction& g) {
  g.validate();
  const std::size_t n = g.grid.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g.grid[a].real() < g.grid[b].real(); });
  std::vector<double> re(n);
  for (std::size_t k = 0; k < n; ++k) re[k] = g.grid[order[k]].real();

  GridFunction out;
  out.grid = g.grid;
  out.values.resize(n);
  out.metadata = g.metadata;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx target = -std::conj(g.grid[i]);
    const double tol = 1e-12 * (1.0 + std::abs(target));
    auto it = std::lower_bound(re.begin(), re.end(), target.real() - tol);
    bool found = false;
    for (; it != re.end() && *it <= target.real() + tol; ++it) {
      const std::size_t k = order[static_cast<std::size_t>(it - re.begin())];
      if (std::abs(g.grid[k] - target) <= tol) {
        out.values[i] = std::conj(g.values[k]);
        found = true;
        break;
      }
    }
    if (!found) throw GridError("apply_S: grid is not closed under w -> -conj(w)");
  }
  return out;
}

double symmetry_defect(const GridFunction& g) {
  const GridFunction s = apply_S(g);
  double d = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) d = std::max(d, std::abs(g.values[i] - s.values[i]));
  return d;
}

std::vector<cplx> symmetric_grid(const std::vector<double>& re, const std::vector<double>& im) {
  std::vector<cplx> g;
  for (double y : im)
    for (double x : re) {
      g.emplace_back(x, y);
      if (x != 0.0) g.emplace_back(-x, y);
    }
  return g;
}

PositivityScan positivity_scan(const Evaluator& f, double h, double h_prime,
                               const std::vector<double>& x_grid) {
  if (!(h_prime > 0.0) || !(h_prime < h)) throw DomainError("positivity_scan: need 0 < h' < h");
  PositivityScan r;
  r.min_im = std::numeric_limits<double>::infinity();
  for (double x : x_grid) {
    if (!(x > 0.0)) throw DomainError("positivity_scan: abscissae must be positive");
    r.min_im = std::min(r.min_im, f(cplx(x, -h_prime)).imag());
  }
  r.ok = r.min_im > 0.0;
  return r;
}

std::vector<double> measure_density_from_boundary(const Evaluator& f, double h,
                                                  const std::vector<double>& lambda_grid,
                                                  double sym_tol) {
  std::vector<double> d;
  d.reserve(lambda_grid.size());
  for (double lam : lambda_grid) {
    if (!(lam >= 0.0)) throw DomainError("measure_density_from_boundary: lambda must be nonnegative");
    const double x = std::sqrt(lam);
    const cplx w(x, -h);
    const cplx v = f(w);
    const cplx vm = f(cplx(-x, -h));
    if (std::abs(v - std::conj(vm)) > sym_tol * (1.0 + std::abs(v)))
      throw DomainError("measure_density_from_boundary: input is not symmetric (Sf != f)");
    d.push_back(v.imag() / kPi);
  }
  return d;
}

LineNorm hprime_norm(const Evaluator& f, double h, double h_prime, const std::vector<double>& peak_hints) {
  if (!(h_prime > 0.0) || !(h_prime < h)) throw DomainError("hprime_norm: need 0 < h' < h");
  const double delta = h - h_prime;
  // Peaks of |f| on the line have width ~delta; panels of that size around each hint,
  // then the two tails [X, inf) mapped onto (0, 1] by x = X/u.
  std::vector<double> cuts{0.0};
  for (double x : peak_hints) {
    if (!std::isfinite(x)) continue;
    for (double c : {x, x - 3.0 * delta, x + 3.0 * delta}) {
      cuts.push_back(c);
      cuts.push_back(-c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             cuts.end());
  const double X = std::max(std::abs(cuts.front()), std::abs(cuts.back())) + 10.0 * delta;
  cuts.insert(cuts.begin(), -X);
  cuts.push_back(X);

  bool bad = false;
  auto line = [&](double x) {
    const cplx v = f(cplx(x, -h_prime));
    if (!is_finite(v)) {
      bad = true;
      return 0.0;
    }
    return std::norm(v) / (x * x + delta * delta);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double kTol = 1e-12;
  constexpr unsigned kDepth = 15;
  double total = 0.0, err = 0.0, e = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] - cuts[k] <= 0.0) continue;
    total += GK::integrate(line, cuts[k], cuts[k + 1], kDepth, kTol, &e);
    err += e;
  }
  for (double sign : {-1.0, 1.0}) {
    auto tail = [&](double u) { return u > 0.0 ? line(sign * X / u) * X / (u * u) : 0.0; };
    total += GK::integrate(tail, 0.0, 1.0, kDepth, kTol, &e);
    err += e;
  }
  if (bad || !std::isfinite(total) || err > 1e-8 * total + 1e-20)
    throw DivergenceError("hprime_norm: line integral does not converge");
  LineNorm r;
  r.value = std::sqrt(total);
  r.error_estimate = r.value > 0.0 ? err / (2.0 * r.value) : std::sqrt(err);
  return r;
}

LineNorm hprime_norm(const StieltjesRational& f, double h_prime) {
  std::vector<double> hints;
  for (double t : f.nodes()) hints.push_back(std::sqrt(t));
  return hprime_norm([&](cplx w) { return eval_stieltjes(f, w); }, f.h(), h_prime, hints);
}

double band_norm(const GridFunction& g, double a, double b, const std::vector<double>& weights) {
  if (!(b > a)) throw GridError("band_norm: empty interval");
  if (weights.size() != g.grid.size() || g.values.size() != g.grid.size())
    throw GridError("band_norm: weights do not match the grid");
  double wsum = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    const cplx x = g.grid[i];
    if (std::abs(x.imag()) > 1e-14 || x.real() < a - 1e-14 || x.real() > b + 1e-14)
      throw GridError("band_norm: abscissa outside the interval");
    if (!(weights[i] >= 0.0)) throw GridError("band_norm: negative weight");
    wsum += weights[i];
    acc += weights[i] * std::norm(g.values[i]);
  }
  if (std::abs(wsum - (b - a)) > 1e-10 * (b - a)) throw GridError("band_norm: rule does not cover the interval");
  return std::sqrt(acc);
}

double mean_weight(double x, double h) {
  if (!(x >= 0.0)) throw DomainError("mean_weight: x must be nonnegative");
  if (x < 1e-9) return 1.0 / (1.0 + h * h);
  if (x > 1e12) return 1.0;
  const double q = 4.0 * x / ((x - 1.0) * (x - 1.0) + h * h);
  return (x * x + 1.0) / (4.0 * x) * std::log1p(q);
}

double mean_weight_infimum(double h) {
  auto phi = [h](double x) { return mean_weight(x, h); };
  const auto m = minimize_on_log_axis(phi, 1e-6, 1e6);
  return std::min({m.second, 1.0 / (1.0 + h * h), 1.0});
}

namespace {

// sup over lambda of (lambda+1) int_0^1 (lambda+1)/|lambda-(w+ih)^2|^2 dw, via its closed form.
double second_moment_sup(double h) {
  auto kappa = [h](double lam) {
    const double x = std::sqrt(lam);
    const double psi = mean_weight(x, h) / (lam + h * h) +
                       (lam + 1.0) / (4.0 * h * (lam + h * h)) * (std::atan((x + 1.0) / h) - std::atan((x - 1.0) / h));
    return (lam + 1.0) * psi;
  };
  const auto m = minimize_on_log_axis([&](double l) { return -kappa(l); }, 1e-10, 1e10);
  return std::max({-m.second, kappa(0.0), 1.0});
}

}  // namespace

MeanRealBound mean_real_lower_bound(const StieltjesRational& f) {
  const double h = f.h();
  MeanRealBound r;
  r.norm_sum = f.rho_star() + dual_norm(f);
  r.mean_real = f.rho_star();
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double t = f.nodes()[j];
    r.mean_real += f.masses()[j] * mean_weight(std::sqrt(t), h) / (t + 1.0);
  }
  r.mu_h = mean_weight_infimum(h);
  r.lower = r.mu_h * r.norm_sum;
  r.c_h = 1.0 / std::sqrt(2.0 * second_moment_sup(h));

  std::vector<double> cuts{0.0, 1.0};
  for (double t : f.nodes()) {
    const double x = std::sqrt(t);
    if (x > 0.0 && x < 1.0) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] - cuts[k] <= 0.0) continue;
    acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double w) { return std::norm(eval_stieltjes(f, cplx(w, 0.0))); }, cuts[k], cuts[k + 1], 20, 1e-12);
  }
  r.l2_norm = std::sqrt(acc);
  return r;
}

void ProblemParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw RangeError("ProblemParams: h must be positive");
  if (!(omega0 > 1.0) || !std::isfinite(omega0)) throw RangeError("ProblemParams: omega0 must exceed 1");
  if (!(eps > 0.0) || !(eps < 1.0)) throw RangeError("ProblemParams: eps must lie in (0, 1)");
  if (n_nodes < 8) throw RangeError("ProblemParams: n_nodes must be at least 8");
}

}  // namespace permext
