#include "permext/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "permext/errors.hpp"
#include "permext/fredholm.hpp"

namespace permext {

std::string to_string(GammaMethod m) {
  switch (m) {
    case GammaMethod::sweep: return "sweep";
    case GammaMethod::eigen_ratio: return "eigen_ratio";
    case GammaMethod::integral_identity: return "integral_identity";
    case GammaMethod::annulus_bound: return "annulus_bound";
  }
  return "unknown";
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) throw RangeError("fit_line: need at least two matching points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw RangeError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.residuals.resize(m);
  double ssr = 0;
  for (std::size_t i = 0; i < m; ++i) {
    f.residuals[i] = y[i] - f.intercept - f.slope * x[i];
    ssr += f.residuals[i] * f.residuals[i];
  }
  f.slope_stderr = m > 2 ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
  return f;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0 && hi >= lo) || per_decade < 1) throw RangeError("log_grid: need 0 < lo <= hi and per_decade >= 1");
  const double decades = std::log10(hi / lo);
  const int n = std::max(1, static_cast<int>(std::lround(decades * per_decade)));
  std::vector<double> g;
  for (int k = 0; k <= n; ++k) g.push_back(lo * std::pow(10.0, decades * k / n));
  if (hi == lo) g.resize(1);
  return g;
}

namespace {

void check_eps_list(const std::vector<double>& eps) {
  if (eps.size() < 6) throw RangeError("gamma sweep: need at least 6 eps values");
  const auto [mn, mx] = std::minmax_element(eps.begin(), eps.end());
  if (std::log10(*mx / *mn) < 2.0 - 1e-9) throw RangeError("gamma sweep: eps values must span at least two decades");
  if (*mn < kEpsHardFloor) throw RangeError("gamma sweep: eps below the binary64 precision floor");
}

GammaEstimate estimate(GammaMethod m, const LineFit& f, double gamma, double lo, double hi) {
  GammaEstimate g;
  g.method = m;
  g.gamma = gamma;
  g.std_error = f.slope_stderr;
  g.r2 = f.r2;
  g.range_lo = lo;
  g.range_hi = hi;
  g.residuals = f.residuals;
  return g;
}

}  // namespace

SweepGamma gamma_from_sweep(const SpectralOperator& S, double omega0, const std::vector<double>& eps_list) {
  check_eps_list(eps_list);
  std::vector<double> eps(eps_list);
  std::sort(eps.begin(), eps.end());
  const Eigen::VectorXcd p = p_vector(cplx(omega0, 0.0), S.op);
  SweepGamma out;
  std::vector<double> le, lD, lL2, l3;
  for (double e : eps) {
    const BoundResult b = bound_D0(S, omega0, e);
    if (!b.constraint_active) throw RangeError("gamma sweep: eps outside the active range");
    SweepPoint pt;
    pt.eps = e;
    pt.D = b.D;
    pt.eta = b.eta;
    pt.norm_L2_star = b.norm_L2;
    pt.norm_L2 = solve_regularized(S.op, p, e * e).g.norm();
    out.points.push_back(pt);
    le.push_back(std::log(e));
    lD.push_back(std::log(pt.D));
    lL2.push_back(std::log(pt.norm_L2));
    l3.push_back(std::log((e + pt.eta / e) * pt.norm_L2_star));
  }
  const LineFit fD = fit_line(le, lD);
  out.from_D = estimate(GammaMethod::sweep, fD, fD.slope, eps.front(), eps.back());
  std::vector<double> linv(le.size());
  std::transform(le.begin(), le.end(), linv.begin(), [](double v) { return -v; });
  const LineFit fL = fit_line(linv, lL2);
  out.from_L2 = estimate(GammaMethod::sweep, fL, 1.0 - fL.slope, eps.front(), eps.back());
  // Ratio form at the smallest eps, as in the liminf definition.
  const LineFit f3 = fit_line(le, l3);
  out.third = estimate(GammaMethod::sweep, f3, l3.front() / le.front(), eps.front(), eps.back());
  out.nonlinear = fD.r2 < 0.99 || fL.r2 < 0.99;
  return out;
}

GammaEstimate gamma_symmetric_sweep(const SpectralOperator& S, double omega0, const std::vector<double>& eps_list) {
  check_eps_list(eps_list);
  std::vector<double> eps(eps_list);
  std::sort(eps.begin(), eps.end());
  std::vector<double> le, lD;
  for (double e : eps) {
    le.push_back(std::log(e));
    lD.push_back(std::log(bound_D_symmetric(S, omega0, e).D_sym));
  }
  const LineFit f = fit_line(le, lD);
  return estimate(GammaMethod::sweep, f, f.slope, eps.front(), eps.back());
}

DecayFit fit_decay(const std::vector<double>& lambda, const std::vector<double>& abs_e, double floor) {
  if (lambda.size() != abs_e.size()) throw RangeError("fit_decay: size mismatch");
  std::vector<double> n, yl, ye;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    if (!(lambda[k] > floor)) break;
    if (!(abs_e[k] > 0.0)) throw RangeError("fit_decay: vanishing eigenfunction value");
    n.push_back(static_cast<double>(k + 1));
    yl.push_back(-std::log(lambda[k]));
    ye.push_back(-std::log(abs_e[k]));
  }
  if (n.size() < 6) throw RangeError("fit_decay: fewer than 6 modes above the floor");
  const LineFit fa = fit_line(n, yl), fb = fit_line(n, ye);
  DecayFit d;
  d.alpha = fa.slope;
  d.beta = fb.slope;
  d.alpha_r2 = fa.r2;
  d.beta_r2 = fb.r2;
  d.n_used = static_cast<int>(n.size());
  if (!(d.beta > 0.0 && 2.0 * d.beta < d.alpha))
    throw InvariantError("fit_decay: rates violate 0 < 2 beta < alpha");
  return d;
}

EigenGamma gamma_from_eigen(const SpectralOperator& S, double omega0, double floor) {
  const Eigen::VectorXcd e = eigenfunction_values(S.eig, p_vector(cplx(omega0, 0.0), S.op));
  std::vector<double> lam(S.eig.values.data(), S.eig.values.data() + S.eig.values.size());
  std::vector<double> ae(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) ae[k] = std::abs(e(k));
  EigenGamma g;
  g.fit = fit_decay(lam, ae, floor);
  g.gamma = 2.0 * g.fit.beta / g.fit.alpha;
  return g;
}

namespace {

void check_series(std::complex<double> a, double b) {
  if (!(b > 0.0 && b < std::abs(a) && std::abs(a) < 1.0)) throw RangeError("series: need 0 < b < |a| < 1");
}

}  // namespace

std::complex<double> series_phi(std::complex<double> a, double b, double eta) {
  check_series(a, b);
  if (!(eta > 0.0)) throw RangeError("series_phi: eta must be positive");
  std::complex<double> s = 0.0, an = 1.0;
  double bn = 1.0;
  const double ra = std::abs(a);
  for (int n = 0; n < 100000; ++n) {
    s += an / (eta + bn);
    an *= a;
    bn *= b;
    // Remaining terms are bounded by |a|^n / (eta (1 - |a|)).
    const double tail = std::abs(an) / (eta * (1.0 - ra));
    if (tail <= 1e-14 * std::abs(s)) return s;
  }
  throw ConvergenceError("series_phi: tail did not reach the tolerance");
}

std::complex<double> companion_psi(std::complex<double> a, double b, double eta) {
  check_series(a, b);
  if (eta < 0.0) throw RangeError("companion_psi: eta must be nonnegative");
  // a^{-n} / (eta + b^{-n}) = (b/a)^n / (1 + eta b^n)
  const std::complex<double> r = b / a;
  std::complex<double> s = 0.0, rn = r;
  double bn = b;
  for (int n = 1; n < 100000; ++n) {
    s += rn / (1.0 + eta * bn);
    rn *= r;
    bn *= b;
    if (std::abs(rn) / (1.0 - std::abs(r)) <= 1e-17 * std::abs(s)) return s;
  }
  throw ConvergenceError("companion_psi: tail did not reach the tolerance");
}

double series_gamma(std::complex<double> a, double b) {
  check_series(a, b);
  return 1.0 - std::log(std::abs(a)) / std::log(b);
}

std::complex<double> series_profile(std::complex<double> a, double b, double t) {
  check_series(a, b);
  const double lb = std::log(b);
  const std::complex<double> la = std::log(a);
  const double bt = std::exp(t * lb);
  std::complex<double> s = 0.0;
  // k >= 0: terms ~ a^k / b^t; k < 0: terms ~ (a/b)^k.
  for (int k = 0; k < 4000; ++k) {
    const std::complex<double> term = std::exp(static_cast<double>(k) * la) / (bt + std::exp(k * lb));
    s += term;
    if (k > 0 && std::abs(term) <= 1e-18 * std::abs(s)) break;
  }
  for (int k = -1; k > -4000; --k) {
    const std::complex<double> term = std::exp(static_cast<double>(k) * (la - lb)) / (bt * std::exp(-k * lb) + 1.0);
    s += term;
    if (std::abs(term) <= 1e-18 * std::abs(s)) break;
  }
  return std::exp(t * (lb - la)) * s;
}

SeriesCheck check_series_lemma(std::complex<double> a, double b, int j_min, int j_max, int n_t) {
  check_series(a, b);
  if (j_max - j_min < 2) throw RangeError("check_series_lemma: need a window of at least three points");
  SeriesCheck c;
  c.gamma_expected = series_gamma(a, b);
  std::vector<double> x, y;
  for (int j = j_min; j <= j_max; ++j) {
    x.push_back(j * std::log(b));
    y.push_back(std::log(std::abs(series_phi(a, b, std::pow(b, j)))));
  }
  c.gamma_fitted = -fit_line(x, y).slope;

  const double g = c.gamma_expected;
  auto rescaled = [&](double s) { return series_phi(a, b, std::pow(b, s)) * std::pow(b, s * g); };
  double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_t; ++k) {
    const double t = static_cast<double>(k) / n_t;
    const std::complex<double> p0 = series_profile(a, b, t);
    const std::complex<double> pj = rescaled(j_min + t), pj1 = rescaled(j_min + 1 + t);
    c.period_drift = std::max(c.period_drift, std::abs(pj - pj1) / std::abs(pj1));
    c.profile_error = std::max(c.profile_error, std::abs(pj - p0) / std::abs(p0));
    pmax = std::max(pmax, std::abs(p0));
    pmin = std::min(pmin, std::abs(p0));
  }
  c.profile_ratio = pmax / pmin;
  return c;
}

namespace {

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// ln(e^x + e^y) without overflow.
double log_add(double x, double y) {
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(std::min(x, y) - m));
}

}  // namespace

double L_function(double tau, double alpha, double beta) {
  if (!(alpha > 2.0 * beta && beta > 0.0)) throw RangeError("L_function: need alpha > 2 beta > 0");
  // Terms peak near e^{alpha k} = e^{-tau}; the slowest one-sided decay rates are
  // alpha - 2 beta (numerator, k > 0) and 2 beta (denominator, k < 0).
  const long kc = std::lround(-tau / alpha);
  const long span = static_cast<long>(std::ceil(40.0 / std::min(alpha - 2.0 * beta, 2.0 * beta))) + 4;
  std::vector<double> num, den;
  for (long k = kc - span; k <= kc + span; ++k) {
    const double l = 2.0 * log_add(alpha * k, -tau);
    num.push_back(tau + (alpha + 2.0 * beta) * k - l);
    den.push_back(2.0 * beta * k - l);
  }
  return std::exp(log_sum_exp(num) - log_sum_exp(den));
}

double gamma_integral_identity(double alpha, double beta, int n_points) {
  if (n_points < 8) throw RangeError("gamma_integral_identity: too few points");
  // L(2x) has period alpha/2 in x; the trapezoid rule is spectrally accurate on a period.
  const double period = 0.5 * alpha;
  double s = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double L = L_function(2.0 * period * k / n_points, alpha, beta);
    s += L / (1.0 + L);
  }
  return s / n_points;
}

double unit_interval_integral(double alpha, double beta, int n_points) {
  if (n_points < 2) throw RangeError("unit_interval_integral: too few points");
  double s = 0.0;
  for (int k = 0; k <= n_points; ++k) {
    const double L = L_function(2.0 * k / n_points, alpha, beta);
    s += (k == 0 || k == n_points ? 0.5 : 1.0) * L / (1.0 + L);
  }
  return s / n_points;
}

}  // namespace permext
