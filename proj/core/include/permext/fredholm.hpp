#pragma once

#include <Eigen/Dense>
#include <vector>

#include "permext/operator_cache.hpp"
#include "permext/quadop.hpp"
#include "permext/stieltjes.hpp"

namespace permext {

/// Smallest eps accepted in binary64, and the start of the flagged regime.
inline constexpr double kEpsHardFloor = 1e-6;
inline constexpr double kEpsSupportedMin = 1e-5;

/// A right-hand side r expanded in the eigenbasis. Modes below rel_cut*lambda_1
/// are merged into `tail`, which is treated as lying in the null space.
struct ModalRhs {
  Eigen::VectorXd lambda;
  Eigen::VectorXd weight;  // |(r, e_n)|^2 with H^2-normalised e_n
  double norm2 = 0.0;      // ||r||^2 in H^2
  double tail = 0.0;

  struct Parts {
    double value = 0.0;     // u(w0) = (u, r)
    double norm2_h2 = 0.0;  // ||u||^2
    double norm2_l2 = 0.0;  // ||u||^2 on the band
  };
  /// Quadratic forms of u = (K + eta)^{-1} r.
  Parts parts(double eta) const;
  double phi(double eta) const;
  double phi_infinity() const;
};

ModalRhs modal_rhs(const EigenSystem& E, const Eigen::VectorXcd& r_hat, double r_norm2, double rel_cut = 1e-15);

struct RegularizedSolution {
  Eigen::VectorXcd g;
  double relative_residual = 0.0;
  bool ill_conditioned = false;
};

/// Solves (A + eta I) g = p_hat by Cholesky. Off the band u = (p - R* g) / eta.
RegularizedSolution solve_regularized(const DiscretizedOperator& K, const Eigen::VectorXcd& p_hat, double eta);

/// Quadratic forms of u from the band solution; ||u||^2 is formed directly.
ModalRhs::Parts linear_parts(const DiscretizedOperator& K, const Eigen::VectorXcd& p_hat, double p_norm2,
                             const Eigen::VectorXcd& g, double eta);

double phi_of_eta(const DiscretizedOperator& K, const Eigen::VectorXcd& p_hat, double p_norm2, double eta);

/// Root of Phi(eta) = eps^2 by bisection on log10(eta) over [-30, 6].
double solve_eta(const ModalRhs& r, double eps);

struct BoundResult {
  ProblemParams params;
  double eta = 0.0;
  double D = 0.0;
  double u_at_omega0 = 0.0;
  double norm_H2 = 0.0;
  double norm_L2 = 0.0;
  Eigen::VectorXcd u_nodes;  // values of u*/||u*|| at the quadrature nodes
  Eigen::VectorXcd g_hat;    // weighted band solution of (A + eta) g = p_hat
  double kkt_residual = 0.0;
  double activity_residual = 0.0;
  double D_spectral = 0.0;
  bool constraint_active = true;
  bool low_precision = false;
};

/// Exact maximiser D^0(eps) = u*(w0)/||u*|| with u* = (K + eta)^{-1} p_{w0}.
BoundResult bound_D0(const SpectralOperator& S, double omega0, double eps);
BoundResult bound_D0(const ProblemParams& params);

/// Value of u = (p - R* g)/eta at an arbitrary point of the half-plane.
cplx maximizer_value(const SpectralOperator& S, const BoundResult& b, cplx omega);

struct ExponentialFormulaCheck {
  double ratio_drift = 0.0;
  double constant = 0.0;
  std::vector<double> eps;
  std::vector<double> deviation;
};

/// Compares ln D(eps) with -int_eps^{eps_max} t/(t^2 + eta(t)) dt up to a constant.
ExponentialFormulaCheck check_exponential_formula(const SpectralOperator& S, double omega0,
                                                  std::vector<double> eps_grid);

struct SymmetricBound {
  double D_sym = 0.0;
  cplx lambda_star = 1.0;
  double phase = 0.0;
  double D0 = 0.0;
  double eta = 0.0;
};

/// max over |lambda| = 1 of the bound for q = (lambda p_{w0} + S(lambda p_{w0}))/2.
SymmetricBound bound_D_symmetric(const SpectralOperator& S, double omega0, double eps, int n_phases = 64);
SymmetricBound bound_D_symmetric(const ProblemParams& params, int n_phases = 64);

/// Value of the symmetric bound for one phase lambda = exp(i phase).
double symmetric_bound_at_phase(const SpectralOperator& S, double omega0, double eps, double phase);

/// |u(w0)| / |u(-w0)| for u = (K + eps^2)^{-1} p_{w0}.
double asymmetry_ratio(const SpectralOperator& S, double omega0, double eps);
double asymmetry_ratio(const ProblemParams& params);

/// F = c psi+ + psi0 and G = c psi- + psi0 where psi = phi/(w + i h)^2 and phi is
/// the symmetric maximiser at an inner level eps'. (f, g) = (F, G)/M is the
/// normalised pair with M = max dual norm.
struct MaximizerPair {
  StieltjesRational F;
  StieltjesRational G;
  double scale = 0.0;         // M = max(||sigma_F||_*, ||sigma_G||_*)
  double band_mismatch = 0.0;  // ||F - G||_{L2(-1,1)}
  double separation_at_omega0 = 0.0;  // |F(w0) - G(w0)|
  double D = 0.0;              // symmetric bound at the requested eps
  double eps = 0.0;
  double eps_inner = 0.0;
  double amplitude = 0.0;
  double atom_at_zero = 0.0;   // -phi(-ih), the mass of psi at t = 0
};

MaximizerPair worst_case_pair(const SpectralOperator& S, double omega0, double eps);
MaximizerPair worst_case_pair(const ProblemParams& params);

}  // namespace permext
