#include "permext/conformal.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "permext/errors.hpp"

namespace permext {

namespace {

using C = std::complex<double>;

struct Solve {
  Eigen::VectorXd coeffs, nodes, density;
};

Solve solve_condenser(double h, int n) {
  Solve s;
  s.nodes.resize(n);
  Eigen::MatrixXd T(n, n);  // T(k, m) = T_m(s_k)
  for (int k = 0; k < n; ++k) {
    const double th = (2.0 * k + 1.0) * kPi / (2.0 * n);
    s.nodes(k) = std::cos(th);
    for (int m = 0; m < n; ++m) T(k, m) = std::cos(m * th);
  }
  // Upper-slit collocation: self term in closed form, image slit by Gauss-Chebyshev.
  Eigen::MatrixXd L(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) L(j, k) = std::log(std::abs(C(s.nodes(j) - s.nodes(k), 2.0 * h)));
  Eigen::MatrixXd M = -(kPi / n) * L * T;
  for (int j = 0; j < n; ++j) {
    M(j, 0) += -kPi * std::log(2.0);
    for (int m = 1; m < n; ++m) M(j, m) += -(kPi / m) * T(j, m);
  }
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, -0.5);
  s.coeffs = M.partialPivLu().solve(rhs);
  s.density = T * s.coeffs;
  return s;
}

C joukowski_inverse(C z) {
  C w = z + std::sqrt(z - 1.0) * std::sqrt(z + 1.0);
  if (std::abs(w) < 1.0) w = 1.0 / w;
  return w;
}

// sum_n a_n int T_n(s) Ln(z - s) / sqrt(1 - s^2) ds; the real part is exact.
C chebyshev_log(C z, const Eigen::VectorXd& a) {
  const C w = joukowski_inverse(z);
  const C winv = 1.0 / w;
  C acc = a(0) * kPi * std::log(0.5 * w);
  C wn = 1.0;
  for (Eigen::Index m = 1; m < a.size(); ++m) {
    wn *= winv;
    acc += a(m) * (-kPi / static_cast<double>(m)) * wn;
  }
  return acc;
}

void check_off_slits(C z, double h) {
  if (std::abs(z.real()) <= 1.0 && std::abs(std::abs(z.imag()) - h) < 1e-14 * (1.0 + h))
    throw DomainError("conformal: point lies on a slit");
}

}  // namespace

AnnulusData riemann_invariant(double h, int n_panel) {
  if (!(h > 0.0)) throw RangeError("riemann_invariant: h must be positive");
  if (n_panel < 32) throw RangeError("riemann_invariant: need at least 32 terms");
  const Solve s1 = solve_condenser(h, n_panel);
  const Solve s2 = solve_condenser(h, 2 * n_panel);
  const double Q1 = kPi * s1.coeffs(0), Q2 = kPi * s2.coeffs(0);
  if (!(Q1 > 0.0)) throw ConvergenceError("riemann_invariant: nonpositive condenser charge");
  AnnulusData d;
  d.h = h;
  d.coeffs = s1.coeffs;
  d.nodes = s1.nodes;
  d.charge_density = s1.density;
  d.log_rho = 1.0 / Q1;
  d.rho = std::exp(d.log_rho);
  d.capacity = 2.0 * kPi * Q1;
  d.refinement_change = std::abs(1.0 / Q1 - 1.0 / Q2);
  const Eigen::Index n = d.nodes.size();
  for (Eigen::Index k = 0; k < n; ++k)
    d.symmetry_defect = std::max(d.symmetry_defect, std::abs(d.charge_density(k) - d.charge_density(n - 1 - k)));
  if (d.refinement_change > 1e-8)
    throw ConvergenceError("riemann_invariant: ln rho not stable under refinement (" +
                           std::to_string(d.refinement_change) + ")");
  return d;
}

std::complex<double> complex_potential(std::complex<double> z, const AnnulusData& data) {
  check_off_slits(z, data.h);
  const C ih(0.0, data.h);
  return chebyshev_log(z - ih, data.coeffs) - chebyshev_log(z + ih, data.coeffs);
}

double potential(std::complex<double> z, const AnnulusData& data) { return complex_potential(z, data).real(); }

double abs_psi(std::complex<double> z, const AnnulusData& data) {
  return std::exp(potential(z, data) * data.log_rho);
}

std::complex<double> psi(std::complex<double> z, const AnnulusData& data) {
  // The branch jumps of Ln are 2 pi i times the slit charge, i.e. 2 pi i / ln rho.
  return std::exp(data.log_rho * complex_potential(z, data));
}

Gamma1Annulus gamma1_annulus(double omega0, const AnnulusData& data, std::optional<double> measured_gamma) {
  if (!(omega0 > 1.0)) throw RangeError("gamma1_annulus: omega0 must exceed 1");
  Gamma1Annulus g;
  const double V = potential(C(omega0, data.h), data);
  g.printed = -V;
  g.factor2 = -2.0 * V;
  if (measured_gamma)
    g.closest = std::abs(g.factor2 - *measured_gamma) < std::abs(g.printed - *measured_gamma) ? 1 : 0;
  return g;
}

ProfileValue near_optimal_profile(std::complex<double> z, double omega0, double eps, const AnnulusData& data,
                                  int n_terms) {
  if (!(eps > 0.0)) throw RangeError("near_optimal_profile: eps must be positive");
  const C p0 = std::conj(psi(C(omega0, data.h), data));
  const C r = p0 * psi(z, data);
  const double ar = std::abs(r);
  const double rho_inv = 1.0 / data.rho, e2 = eps * eps;
  ProfileValue out;
  C rn = 1.0, s = 0.0;
  double rho_n = 1.0;
  if (n_terms > 0) {
    for (int n = 1; n <= n_terms; ++n) {
      rn *= r;
      rho_n *= rho_inv;
      s += rn / (rho_n + e2);
    }
    out.value = s;
    out.n_terms = n_terms;
    return out;
  }
  if (!(ar < 1.0)) throw RangeError("near_optimal_profile: series diverges at this point");
  // Past the crossover rho^{-n} = eps^2 the terms decay at least like |r|^n / eps^2.
  const int n_cross = static_cast<int>(std::ceil(std::log(1.0 / e2) / data.log_rho)) + 1;
  for (int n = 1; n < 10000000; ++n) {
    rn *= r;
    rho_n *= rho_inv;
    const C term = rn / (rho_n + e2);
    s += term;
    if (n > n_cross && std::abs(rn) / e2 / (1.0 - ar) <= 1e-12 * std::abs(s)) {
      out.value = s;
      out.n_terms = n;
      return out;
    }
  }
  throw ConvergenceError("near_optimal_profile: tail bound not met");
}

double angular_size(std::complex<double> s) { return -std::arg((s + 1.0) / (s - 1.0)) / kPi; }

AppendixBounds appendix_bounds(double omega0, double h) {
  if (!(omega0 > 1.0) || !(h > 0.0)) throw RangeError("appendix_bounds: need omega0 > 1 and h > 0");
  AppendixBounds b;
  b.h = h;
  b.omega0 = omega0;
  b.alpha0 = std::atan(2.0 / h) / kPi;
  b.alpha_omega0 = angular_size(C(omega0, h));
  b.beta0 = std::atan(12.0 / 5.0) / kPi;
  const double r = std::sqrt(4.0 * h * h + 8.0 * h + 3.0);
  b.z0 = C(0.0, 0.5 * r);
  b.rho_disc = 2.0 * h + 2.0 - r;
  const C s(omega0, h);
  b.m_abs = std::abs((s - b.z0) / (s + b.z0));
  b.gamma0 = b.beta0 * std::log(b.m_abs) / std::log(b.rho_disc);
  b.gamma1_lower_route = b.alpha_omega0 / b.alpha0;
  b.ordered = b.gamma0 > 0.0 && b.gamma0 <= b.gamma1_lower_route && b.gamma1_lower_route < 1.0;
  return b;
}

std::complex<double> ansatz_G(std::complex<double> zeta, std::complex<double> s, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw RangeError("ansatz_G: need 0 < delta < 1");
  if (std::abs(zeta - 1.0) < 1e-12 || std::abs(zeta + 1.0) < 1e-12)
    throw DomainError("ansatz_G: too close to a branch point");
  const C L = std::log((1.0 + zeta) / (1.0 - zeta));
  return delta / (zeta - std::conj(s)) * std::exp(C(0.0, 1.0 / kPi) * std::log(delta) * L);
}

}  // namespace permext
