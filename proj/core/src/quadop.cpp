#include "permext/quadop.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "permext/errors.hpp"

namespace permext {

Quadrature gauss_legendre(int n, double a, double b) {
  if (n < 1) throw RangeError("gauss_legendre: n must be positive");
  if (!(b > a)) throw RangeError("gauss_legendre: need a < b");
  Quadrature q;
  q.a = a;
  q.b = b;
  q.nodes.assign(n, 0.5 * (a + b));
  q.weights.assign(n, b - a);
  if (n == 1) return q;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  // Legendre P_n and its derivative by the three-term recurrence.
  auto legendre = [n](double x, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = mid - half * x;
    q.nodes[n - 1 - i] = mid + half * x;
    q.weights[i] = q.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = mid;
  return q;
}

cplx kernel_value(double y, double x, double h) {
  return cplx(0.0, 1.0) / (2.0 * kPi * cplx(y - x, 2.0 * h));
}

cplx reproducing_kernel(cplx omega, cplx omega0, double h) {
  return cplx(0.0, 1.0) / (2.0 * kPi * (omega - std::conj(omega0) + cplx(0.0, 2.0 * h)));
}

double p_norm2(cplx omega0, double h) {
  if (!(omega0.imag() > -h)) throw DomainError("p_norm2: omega0 outside the half-plane");
  return 1.0 / (4.0 * kPi * (h + omega0.imag()));
}

DiscretizedOperator build_operator(double h, int n) {
  if (!(h > 0.0)) throw RangeError("build_operator: h must be positive");
  if (n < 2) throw RangeError("build_operator: need at least two nodes");
  DiscretizedOperator K;
  K.h = h;
  K.quad = gauss_legendre(n, -1.0, 1.0);
  K.sqrt_w.resize(n);
  for (int j = 0; j < n; ++j) K.sqrt_w(j) = std::sqrt(K.quad.weights[j]);
  K.matrix.resize(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      K.matrix(j, k) = K.sqrt_w(j) * kernel_value(K.quad.nodes[j], K.quad.nodes[k], h) * K.sqrt_w(k);
  // Exact Hermitian symmetry regardless of rounding in the kernel.
  for (int k = 0; k < n; ++k) {
    K.matrix(k, k) = cplx(K.matrix(k, k).real(), 0.0);
    for (int j = k + 1; j < n; ++j) K.matrix(k, j) = std::conj(K.matrix(j, k));
  }
  return K;
}

EigenSystem eigen(const DiscretizedOperator& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K.matrix);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigen: Hermitian eigensolver failed");
  const Eigen::Index n = K.matrix.rows();
  EigenSystem E;
  E.values = es.eigenvalues().reverse();
  E.vectors = es.eigenvectors().rowwise().reverse();
  const double lam1 = std::max(std::abs(E.values(0)), std::abs(E.values(n - 1)));
  const Eigen::MatrixXcd R = K.matrix * E.vectors - E.vectors * E.values.asDiagonal();
  E.residual = R.colwise().norm().maxCoeff();
  E.orthogonality_defect =
      (E.vectors.adjoint() * E.vectors - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (E.residual > 1e-12 * lam1 || E.orthogonality_defect > 1e-12)
    throw ConvergenceError("eigen: residual check failed (" + std::to_string(E.residual) + ")");
  return E;
}

DecayRate decay_rate(const std::vector<double>& lambdas, double floor, int min_modes) {
  std::vector<double> y;
  for (double l : lambdas) {
    if (!(l > floor)) break;
    y.push_back(-std::log(l));
  }
  const int m = static_cast<int>(y.size());
  if (m < min_modes) throw RangeError("decay_rate: fewer than " + std::to_string(min_modes) + " modes above the floor");
  double sx = 0, sy = 0;
  for (int i = 0; i < m; ++i) {
    sx += i + 1;
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < m; ++i) {
    const double dx = i + 1 - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  DecayRate r;
  r.alpha = sxy / sxx;
  r.intercept = my - r.alpha * mx;
  r.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  r.n_used = m;
  return r;
}

DecayRate decay_rate(const EigenSystem& E, double floor, int min_modes) {
  std::vector<double> l(E.values.data(), E.values.data() + E.values.size());
  return decay_rate(l, floor, min_modes);
}

Eigen::VectorXcd p_vector(cplx omega0, const DiscretizedOperator& K) {
  if (!(omega0.imag() > -K.h)) throw DomainError("p_vector: omega0 outside the half-plane");
  const Eigen::Index n = static_cast<Eigen::Index>(K.size());
  Eigen::VectorXcd p(n);
  for (Eigen::Index j = 0; j < n; ++j)
    p(j) = K.sqrt_w(j) * reproducing_kernel(cplx(K.quad.nodes[j], 0.0), omega0, K.h);
  return p;
}

cplx rkhs_extend(const Eigen::VectorXcd& g, const DiscretizedOperator& K, cplx omega) {
  if (!(omega.imag() > -K.h)) throw DomainError("rkhs_extend: omega outside the half-plane");
  if (g.size() != static_cast<Eigen::Index>(K.size())) throw RangeError("rkhs_extend: size mismatch");
  cplx acc = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j)
    acc += reproducing_kernel(omega, cplx(K.quad.nodes[j], 0.0), K.h) * K.sqrt_w(j) * g(j);
  return acc;
}

Eigen::VectorXcd eigenfunction_values(const EigenSystem& E, const Eigen::VectorXcd& p_hat) {
  const Eigen::VectorXcd c = E.vectors.adjoint() * p_hat;
  Eigen::VectorXcd e(c.size());
  for (Eigen::Index n = 0; n < c.size(); ++n)
    e(n) = E.values(n) > 0.0 ? std::conj(c(n)) / std::sqrt(E.values(n)) : cplx(0.0);
  return e;
}

}  // namespace permext
