#include "permext/fredholm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

#include "permext/errors.hpp"

namespace permext {

ModalRhs::Parts ModalRhs::parts(double eta) const {
  Parts r;
  for (Eigen::Index n = 0; n < lambda.size(); ++n) {
    const double d = lambda(n) + eta;
    r.value += weight(n) / d;
    r.norm2_h2 += weight(n) / (d * d);
    r.norm2_l2 += lambda(n) * weight(n) / (d * d);
  }
  r.value += tail / eta;
  r.norm2_h2 += tail / (eta * eta);
  return r;
}

double ModalRhs::phi(double eta) const {
  const Parts p = parts(eta);
  return p.norm2_l2 / p.norm2_h2;
}

double ModalRhs::phi_infinity() const {
  double s = 0.0;
  for (Eigen::Index n = 0; n < lambda.size(); ++n) s += lambda(n) * weight(n);
  return s / norm2;
}

ModalRhs modal_rhs(const EigenSystem& E, const Eigen::VectorXcd& r_hat, double r_norm2, double rel_cut) {
  const Eigen::VectorXcd c = E.vectors.adjoint() * r_hat;
  const double lam1 = E.values(0);
  Eigen::Index m = 0;
  while (m < E.values.size() && E.values(m) > rel_cut * lam1) ++m;
  ModalRhs r;
  r.norm2 = r_norm2;
  r.lambda = E.values.head(m);
  r.weight.resize(m);
  double s = 0.0;
  for (Eigen::Index n = 0; n < m; ++n) {
    r.weight(n) = std::norm(c(n)) / r.lambda(n);
    s += r.weight(n);
  }
  r.tail = std::max(r_norm2 - s, 0.0);
  return r;
}

RegularizedSolution solve_regularized(const DiscretizedOperator& K, const Eigen::VectorXcd& p_hat, double eta) {
  if (!(eta > 0.0)) throw RangeError("solve_regularized: eta must be positive");
  const Eigen::Index n = K.matrix.rows();
  Eigen::MatrixXcd M = K.matrix;
  M.diagonal().array() += eta;
  Eigen::LLT<Eigen::MatrixXcd> llt(M);
  if (llt.info() != Eigen::Success) throw ConvergenceError("solve_regularized: Cholesky factorisation failed");
  RegularizedSolution s;
  s.g = llt.solve(p_hat);
  const double pn = p_hat.norm();
  s.relative_residual = pn > 0 ? (M * s.g - p_hat).norm() / pn : 0.0;
  const double lam1_bound = K.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  s.ill_conditioned = eta < 1e3 * std::numeric_limits<double>::epsilon() * lam1_bound;
  (void)n;
  return s;
}

ModalRhs::Parts linear_parts(const DiscretizedOperator& K, const Eigen::VectorXcd& p_hat, double p_norm2,
                             const Eigen::VectorXcd& g, double eta) {
  const double s = p_hat.dot(g).real();  // p_hat^H g = (R* g)(w0)
  const double gAg = g.dot(K.matrix * g).real();
  ModalRhs::Parts r;
  r.value = (p_norm2 - s) / eta;
  r.norm2_h2 = (p_norm2 - 2.0 * s + gAg) / (eta * eta);
  r.norm2_l2 = g.squaredNorm();
  return r;
}

double phi_of_eta(const DiscretizedOperator& K, const Eigen::VectorXcd& p_hat, double p_norm2, double eta) {
  const RegularizedSolution s = solve_regularized(K, p_hat, eta);
  const ModalRhs::Parts p = linear_parts(K, p_hat, p_norm2, s.g, eta);
  return p.norm2_l2 / p.norm2_h2;
}

double solve_eta(const ModalRhs& r, double eps) {
  if (!(eps >= kEpsHardFloor)) throw RangeError("solve_eta: eps below the binary64 precision floor");
  const double target = eps * eps;
  if (!(target < r.phi_infinity())) throw RangeError("solve_eta: constraint inactive (eps^2 >= Phi(inf))");
  double lo = -30.0, hi = 6.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (r.phi(std::pow(10.0, mid)) < target)
      lo = mid;
    else
      hi = mid;
  }
  return std::pow(10.0, 0.5 * (lo + hi));
}

BoundResult bound_D0(const SpectralOperator& S, double omega0, double eps) {
  const double h = S.op.h;
  BoundResult b;
  b.params.h = h;
  b.params.omega0 = omega0;
  b.params.eps = eps;
  b.params.n_nodes = static_cast<int>(S.op.size());
  b.params.validate();
  if (eps < kEpsHardFloor) throw RangeError("bound_D0: eps below the binary64 precision floor");
  b.low_precision = eps < kEpsSupportedMin;

  const Eigen::VectorXcd p = p_vector(cplx(omega0, 0.0), S.op);
  const double pn2 = p_norm2(cplx(omega0, 0.0), h);
  const ModalRhs r = modal_rhs(S.eig, p, pn2);

  if (!(eps * eps < r.phi_infinity())) {
    // Inactive constraint: the unconstrained maximiser p/||p||.
    b.constraint_active = false;
    b.eta = std::numeric_limits<double>::infinity();
    b.D = b.D_spectral = std::sqrt(pn2);
    b.u_at_omega0 = pn2;
    b.norm_H2 = std::sqrt(pn2);
    b.norm_L2 = p.norm();
    b.g_hat = p;
    b.u_nodes = p.cwiseQuotient(S.op.sqrt_w.cast<cplx>()) / b.norm_H2;
    return b;
  }

  b.eta = solve_eta(r, eps);
  const ModalRhs::Parts sp = r.parts(b.eta);
  b.D_spectral = sp.value / std::sqrt(sp.norm2_h2);

  const RegularizedSolution sol = solve_regularized(S.op, p, b.eta);
  const ModalRhs::Parts lp = linear_parts(S.op, p, pn2, sol.g, b.eta);
  b.g_hat = sol.g;
  b.u_at_omega0 = lp.value;
  b.norm_H2 = std::sqrt(lp.norm2_h2);
  b.norm_L2 = std::sqrt(lp.norm2_l2);
  b.D = lp.value / b.norm_H2;
  b.u_nodes = sol.g.cwiseQuotient(S.op.sqrt_w.cast<cplx>()) / b.norm_H2;
  b.kkt_residual = std::abs(lp.value - (eps * eps + b.eta) * lp.norm2_h2) / std::abs(lp.value);
  b.activity_residual = std::abs(b.norm_L2 - eps * b.norm_H2) / (eps * b.norm_H2);
  return b;
}

BoundResult bound_D0(const ProblemParams& params) {
  params.validate();
  const SpectralOperator S = build_spectral_operator(params.h, params.n_nodes);
  return bound_D0(S, params.omega0, params.eps);
}

cplx maximizer_value(const SpectralOperator& S, const BoundResult& b, cplx omega) {
  const cplx w0(b.params.omega0, 0.0);
  const cplx p = reproducing_kernel(omega, w0, S.op.h);
  if (!b.constraint_active) return p / b.norm_H2;
  return (p - rkhs_extend(b.g_hat, S.op, omega)) / b.eta / b.norm_H2;
}

ExponentialFormulaCheck check_exponential_formula(const SpectralOperator& S, double omega0,
                                                  std::vector<double> eps_grid) {
  std::sort(eps_grid.begin(), eps_grid.end());
  eps_grid.erase(std::unique(eps_grid.begin(), eps_grid.end()), eps_grid.end());
  ExponentialFormulaCheck out;
  const std::size_t m = eps_grid.size();
  if (m == 0) return out;
  std::vector<double> lnD(m), g(m), lnt(m);
  for (std::size_t k = 0; k < m; ++k) {
    const BoundResult b = bound_D0(S, omega0, eps_grid[k]);
    if (!b.constraint_active) throw RangeError("check_exponential_formula: eps outside the active range");
    const double t = eps_grid[k];
    lnD[k] = std::log(b.D);
    lnt[k] = std::log(t);
    g[k] = t * t / (t * t + b.eta);  // t/(t^2+eta) dt written in d(ln t)
  }
  // I_k = int_{eps_k}^{eps_max} by the trapezoid rule in ln t.
  std::vector<double> I(m, 0.0);
  for (std::size_t k = m - 1; k-- > 0;) I[k] = I[k + 1] + 0.5 * (g[k] + g[k + 1]) * (lnt[k + 1] - lnt[k]);
  out.eps = eps_grid;
  out.deviation.resize(m);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < m; ++k) {
    out.deviation[k] = lnD[k] + I[k];
    lo = std::min(lo, out.deviation[k]);
    hi = std::max(hi, out.deviation[k]);
  }
  out.constant = 0.5 * (lo + hi);
  for (auto& d : out.deviation) d -= out.constant;
  out.ratio_drift = 0.5 * (hi - lo);
  return out;
}

namespace {

struct SymmetricModal {
  Eigen::VectorXd lambda;
  Eigen::VectorXcd cp, cm;  // (v_n, p_{+w0}) and (v_n, p_{-w0}) on kept modes
  double pn2 = 0.0;
  cplx cross = 0.0;  // (p_{w0}, p_{-w0}) = p_{w0}(-w0)
};

SymmetricModal symmetric_modal(const SpectralOperator& S, double omega0) {
  const double h = S.op.h;
  SymmetricModal s;
  const Eigen::VectorXcd pp = p_vector(cplx(omega0, 0.0), S.op);
  const Eigen::VectorXcd pm = p_vector(cplx(-omega0, 0.0), S.op);
  const double lam1 = S.eig.values(0);
  Eigen::Index m = 0;
  while (m < S.eig.values.size() && S.eig.values(m) > 1e-15 * lam1) ++m;
  s.lambda = S.eig.values.head(m);
  s.cp = (S.eig.vectors.leftCols(m).adjoint() * pp);
  s.cm = (S.eig.vectors.leftCols(m).adjoint() * pm);
  s.pn2 = p_norm2(cplx(omega0, 0.0), h);
  s.cross = reproducing_kernel(cplx(-omega0, 0.0), cplx(omega0, 0.0), h);
  return s;
}

ModalRhs phase_rhs(const SymmetricModal& s, double phase) {
  const cplx lam = std::polar(1.0, phase);
  ModalRhs r;
  r.lambda = s.lambda;
  r.weight.resize(s.lambda.size());
  double sum = 0.0;
  for (Eigen::Index n = 0; n < s.lambda.size(); ++n) {
    const cplx c = 0.5 * (lam * s.cp(n) + std::conj(lam) * s.cm(n));
    r.weight(n) = std::norm(c) / s.lambda(n);
    sum += r.weight(n);
  }
  r.norm2 = 0.5 * s.pn2 + 0.5 * (lam * lam * s.cross).real();
  r.tail = std::max(r.norm2 - sum, 0.0);
  return r;
}

double bound_for_rhs(const ModalRhs& r, double eps, double* eta_out = nullptr) {
  if (!(eps * eps < r.phi_infinity())) {
    if (eta_out) *eta_out = std::numeric_limits<double>::infinity();
    return std::sqrt(r.norm2);
  }
  const double eta = solve_eta(r, eps);
  if (eta_out) *eta_out = eta;
  const ModalRhs::Parts p = r.parts(eta);
  return p.value / std::sqrt(p.norm2_h2);
}

}  // namespace

double symmetric_bound_at_phase(const SpectralOperator& S, double omega0, double eps, double phase) {
  return bound_for_rhs(phase_rhs(symmetric_modal(S, omega0), phase), eps);
}

SymmetricBound bound_D_symmetric(const SpectralOperator& S, double omega0, double eps, int n_phases) {
  if (n_phases < 8) throw RangeError("bound_D_symmetric: need at least 8 phases");
  if (eps < kEpsHardFloor) throw RangeError("bound_D_symmetric: eps below the binary64 precision floor");
  const SymmetricModal s = symmetric_modal(S, omega0);
  // lambda and -lambda give the same q up to sign, so [0, pi) covers the circle.
  const double step = kPi / n_phases;
  double best_phase = 0.0, best = -1.0;
  for (int k = 0; k < n_phases; ++k) {
    const double ph = k * step;
    const double v = bound_for_rhs(phase_rhs(s, ph), eps);
    if (v > best) {
      best = v;
      best_phase = ph;
    }
  }
  auto neg = [&](double ph) { return -bound_for_rhs(phase_rhs(s, ph), eps); };
  const auto ref = boost::math::tools::brent_find_minima(neg, best_phase - step, best_phase + step, 40);
  if (-ref.second > best) {
    best = -ref.second;
    best_phase = ref.first;
  }
  best_phase = std::fmod(best_phase + kPi, kPi);

  SymmetricBound out;
  out.D_sym = best;
  out.phase = best_phase;
  out.lambda_star = std::polar(1.0, best_phase);
  bound_for_rhs(phase_rhs(s, best_phase), eps, &out.eta);

  const Eigen::VectorXcd p = p_vector(cplx(omega0, 0.0), S.op);
  out.D0 = bound_for_rhs(modal_rhs(S.eig, p, s.pn2), eps);
  const double tol = 1e-10;
  if (out.D_sym > out.D0 * (1.0 + tol) || out.D_sym < 0.5 * out.D0 * (1.0 - tol))
    throw InvariantError("bound_D_symmetric: sandwich D0/2 <= D_sym <= D0 violated");
  return out;
}

SymmetricBound bound_D_symmetric(const ProblemParams& params, int n_phases) {
  params.validate();
  const SpectralOperator S = build_spectral_operator(params.h, params.n_nodes);
  return bound_D_symmetric(S, params.omega0, params.eps, n_phases);
}

double asymmetry_ratio(const SpectralOperator& S, double omega0, double eps) {
  const double eta = eps * eps;
  const cplx w0(omega0, 0.0);
  const Eigen::VectorXcd p = p_vector(w0, S.op);
  const RegularizedSolution sol = solve_regularized(S.op, p, eta);
  auto u = [&](cplx w) { return (reproducing_kernel(w, w0, S.op.h) - rkhs_extend(sol.g, S.op, w)) / eta; };
  return std::abs(u(w0)) / std::abs(u(-w0));
}

double asymmetry_ratio(const ProblemParams& params) {
  params.validate();
  const SpectralOperator S = build_spectral_operator(params.h, params.n_nodes);
  return asymmetry_ratio(S, params.omega0, params.eps);
}

}  // namespace permext
