#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "permext/stieltjes.hpp"

namespace permext {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = -1.0;
  double b = 1.0;

  std::size_t size() const { return nodes.size(); }
};

Quadrature gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// k(y, x) = i / (2 pi (y - x + 2 i h))
cplx kernel_value(double y, double x, double h);

/// Reproducing element p_{w0}(w) = i / (2 pi (w - conj(w0) + 2 i h)).
cplx reproducing_kernel(cplx omega, cplx omega0, double h);

/// ||p_{w0}||^2 = p_{w0}(w0) = 1 / (4 pi (h + Im w0)).
double p_norm2(cplx omega0, double h);

/// Nystrom matrix A_jk = sqrt(w_j) k(x_j, x_k) sqrt(w_k) of the band operator.
struct DiscretizedOperator {
  Quadrature quad;
  double h = 1.0;
  Eigen::VectorXd sqrt_w;
  Eigen::MatrixXcd matrix;

  std::size_t size() const { return quad.size(); }
};

inline constexpr int kDefaultNodes = 200;

DiscretizedOperator build_operator(double h, int n = kDefaultNodes);

/// Descending eigenvalues with orthonormal eigenvectors (columns).
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  double residual = 0.0;
  double orthogonality_defect = 0.0;
};

EigenSystem eigen(const DiscretizedOperator& K);

struct DecayRate {
  double alpha = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n_used = 0;
};

inline constexpr double kEigenFloor = 1e-12;

/// Least-squares slope of -ln(lambda_n) against n over eigenvalues above the floor.
DecayRate decay_rate(const std::vector<double>& lambdas, double floor = kEigenFloor, int min_modes = 6);
DecayRate decay_rate(const EigenSystem& E, double floor = kEigenFloor, int min_modes = 6);

/// Weighted samples sqrt(w_j) p_{w0}(x_j).
Eigen::VectorXcd p_vector(cplx omega0, const DiscretizedOperator& K);

/// (R* g)(w) = sum_j p_{x_j}(w) sqrt(w_j) g_j
cplx rkhs_extend(const Eigen::VectorXcd& g, const DiscretizedOperator& K, cplx omega);

/// Values e_n(w0) of the H^2-normalised eigenfunctions e_n = R* v_n / sqrt(lambda_n),
/// from the adjoint relation (p_{w0}, e_n)_{L2} = lambda_n conj(e_n(w0)).
Eigen::VectorXcd eigenfunction_values(const EigenSystem& E, const Eigen::VectorXcd& p_hat);

}  // namespace permext
