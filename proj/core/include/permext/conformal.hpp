#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "permext/stieltjes.hpp"

namespace permext {

/// Two-slit condenser G_h = C \ ([-1,1] + ih, [-1,1] - ih) in the shifted plane.
/// The potential V is -1/2 on the upper slit, +1/2 on the lower one and 0 on
/// the real axis; |Psi| = exp(V ln rho).
struct AnnulusData {
  double h = 0.0;
  double rho = 0.0;
  double log_rho = 0.0;
  double capacity = 0.0;              // 2 pi / ln rho
  Eigen::VectorXd coeffs;             // density on the upper slit: sum a_n T_n(s) / sqrt(1 - s^2)
  Eigen::VectorXd nodes;              // Chebyshev collocation points s_k
  Eigen::VectorXd charge_density;     // sum a_n T_n(s_k), the density times sqrt(1 - s_k^2)
  double refinement_change = 0.0;     // |ln rho(n) - ln rho(2n)|
  double symmetry_defect = 0.0;       // max |density(s) - density(-s)|
};

/// Solves the condenser problem with n_panel Chebyshev terms and checks it against 2 n_panel.
AnnulusData riemann_invariant(double h, int n_panel = 256);

/// Harmonic potential V(z) and its analytic completion F with Re F = V.
double potential(std::complex<double> z, const AnnulusData& data);
std::complex<double> complex_potential(std::complex<double> z, const AnnulusData& data);

/// |Psi(z)| and Psi(z) for z in the shifted plane, off the slits.
double abs_psi(std::complex<double> z, const AnnulusData& data);
std::complex<double> psi(std::complex<double> z, const AnnulusData& data);

struct Gamma1Annulus {
  double printed = 0.0;   // -ln|Psi(w0 + ih)| / ln rho
  double factor2 = 0.0;   // -2 ln|Psi(w0 + ih)| / ln rho
  int closest = -1;       // 0 printed, 1 factor2, -1 when no measured value was given
};

Gamma1Annulus gamma1_annulus(double omega0, const AnnulusData& data,
                             std::optional<double> measured_gamma = std::nullopt);

struct ProfileValue {
  std::complex<double> value;
  int n_terms = 0;
};

/// sum_{n>=1} conj(Psi0)^n Psi(z)^n / (rho^{-n} + eps^2) with Psi0 = Psi(w0 + ih) and
/// z in the shifted plane. n_terms = 0 picks the truncation from a tail bound.
ProfileValue near_optimal_profile(std::complex<double> z, double omega0, double eps, const AnnulusData& data,
                                  int n_terms = 0);

/// Angular size of [-1, 1] seen from s, in units of pi.
double angular_size(std::complex<double> s);

struct AppendixBounds {
  double h = 0.0;
  double omega0 = 0.0;
  double alpha0 = 0.0;        // min over the slit of alpha(x + ih)
  double alpha_omega0 = 0.0;  // alpha(w0 + ih)
  double beta0 = 0.0;
  std::complex<double> z0;
  double rho_disc = 0.0;
  double m_abs = 0.0;         // |m(w0 + ih)|
  double gamma0 = 0.0;
  double gamma1_lower_route = 0.0;
  bool ordered = false;       // 0 < gamma0 <= gamma1_lower_route < 1
};

AppendixBounds appendix_bounds(double omega0, double h);

/// G(zeta) = delta/(zeta - conj(s)) exp((i/pi) ln(delta) Ln((1 + zeta)/(1 - zeta))).
std::complex<double> ansatz_G(std::complex<double> zeta, std::complex<double> s, double delta);

}  // namespace permext
