#pragma once

#include <complex>
#include <string>
#include <vector>

#include "permext/operator_cache.hpp"

namespace permext {

enum class GammaMethod { sweep, eigen_ratio, integral_identity, annulus_bound };

std::string to_string(GammaMethod m);

/// Least-squares line y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct GammaEstimate {
  double gamma = 0.0;
  GammaMethod method = GammaMethod::sweep;
  double std_error = 0.0;
  double r2 = 0.0;
  double range_lo = 0.0;  // eps or n window
  double range_hi = 0.0;
  std::vector<double> residuals;
};

struct SweepPoint {
  double eps = 0.0;
  double D = 0.0;
  double eta = 0.0;
  double norm_L2 = 0.0;  // ||u_eps||_{L2(-1,1)} with (K + eps^2) u = p
  double norm_L2_star = 0.0;  // ||u*||_{L2(-1,1)} of the exact maximiser, unnormalised
};

struct SweepGamma {
  GammaEstimate from_D;   // slope of ln D vs ln eps
  GammaEstimate from_L2;  // 1 - slope of ln ||u_eps||_{L2} vs ln(1/eps)
  GammaEstimate third;    // slope of ln((eps + eta/eps) ||u*||_{L2}) vs ln eps, diagnostic only
  std::vector<SweepPoint> points;
  bool nonlinear = false;  // some fit has R^2 < 0.99
};

/// Log-spaced grid of eps values with `per_decade` points per decade, endpoints included.
std::vector<double> log_grid(double lo, double hi, int per_decade);

SweepGamma gamma_from_sweep(const SpectralOperator& S, double omega0, const std::vector<double>& eps_list);

/// Exponent of ln D_sym vs ln eps over the same kind of grid.
GammaEstimate gamma_symmetric_sweep(const SpectralOperator& S, double omega0, const std::vector<double>& eps_list);

/// lambda_n ~ exp(-alpha n) and |e_n(w0)| ~ exp(-beta n), with 0 < 2 beta < alpha.
struct DecayFit {
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_r2 = 0.0;
  double beta_r2 = 0.0;
  int n_used = 0;
};

/// Fits both rates on the modes with lambda_n > floor. Throws InvariantError when 2 beta >= alpha.
DecayFit fit_decay(const std::vector<double>& lambda, const std::vector<double>& abs_e, double floor = 1e-12);

struct EigenGamma {
  DecayFit fit;
  double gamma = 0.0;
};

/// gamma = 2 beta / alpha with e_n(w0) recovered through (p_{w0}, e_n) = lambda_n conj(e_n(w0)).
EigenGamma gamma_from_eigen(const SpectralOperator& S, double omega0, double floor = 1e-12);

/// phi(eta) = sum_{n>=0} a^n / (eta + b^n), summed to a relative tail below 1e-14.
std::complex<double> series_phi(std::complex<double> a, double b, double eta);
/// psi(eta) = sum_{n>=1} a^{-n} / (eta + b^{-n}); psi(0) = b / (a - b).
std::complex<double> companion_psi(std::complex<double> a, double b, double eta);
/// gamma = 1 - ln|a| / ln b.
double series_gamma(std::complex<double> a, double b);
/// phi_0(t) = (b/a)^t sum_{k in Z} a^k / (b^t + b^k), the 1-periodic limit profile.
std::complex<double> series_profile(std::complex<double> a, double b, double t);

struct SeriesCheck {
  double gamma_expected = 0.0;
  double gamma_fitted = 0.0;
  double period_drift = 0.0;    // max_t |P_j(t) - P_{j+1}(t)| / |P_{j+1}(t)|
  double profile_error = 0.0;   // max_t |P_j(t) - phi_0(t)| / |phi_0(t)|
  double profile_ratio = 0.0;   // max |phi_0| / min |phi_0| over one period
};

/// P_j(t) = phi(b^{j+t}) b^{(j+t) gamma}; exponent fitted along eta = b^j for j in [j_min, j_max].
SeriesCheck check_series_lemma(std::complex<double> a, double b, int j_min = 10, int j_max = 40, int n_t = 64);

double L_function(double tau, double alpha, double beta);

/// Mean of L(2x)/(1 + L(2x)) over one period x in [0, alpha/2]; equals 2 beta / alpha.
double gamma_integral_identity(double alpha, double beta, int n_points = 256);
/// The same integrand integrated over x in [0, 1] without period averaging.
double unit_interval_integral(double alpha, double beta, int n_points = 4096);

}  // namespace permext
