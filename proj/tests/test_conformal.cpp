#include <gtest/gtest.h>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>

#include "permext/conformal.hpp"
#include "permext/errors.hpp"
#include "permext/exponent.hpp"
#include "permext/fredholm.hpp"

using namespace permext;

namespace {

using C = std::complex<double>;

const AnnulusData& annulus(double h) {
  static std::map<double, AnnulusData> cache;
  auto it = cache.find(h);
  if (it == cache.end()) it = cache.emplace(h, riemann_invariant(h)).first;
  return it->second;
}

// Re of an antiderivative of log(u + c): (u + c)(log(u + c) - 1).
double int_log_abs(double a, double b, C c) {
  auto F = [&](double u) {
    const C w = u + c;
    return std::abs(w) == 0.0 ? 0.0 : (w * (std::log(w) - 1.0)).real();
  };
  return F(b) - F(a);
}

// ln rho from piecewise-constant charges on the upper slit with the odd image on the lower slit.
double log_rho_panels(double h, int n) {
  std::vector<double> e(n + 1);
  for (int k = 0; k <= n; ++k) e[k] = -std::cos(kPi * k / n);
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j) {
    const double x = 0.5 * (e[j] + e[j + 1]);
    for (int k = 0; k < n; ++k)
      A(j, k) = int_log_abs(e[k] - x, e[k + 1] - x, 0.0) - int_log_abs(e[k] - x, e[k + 1] - x, C(0.0, 2.0 * h));
  }
  const Eigen::VectorXd q = A.partialPivLu().solve(Eigen::VectorXd::Constant(n, -0.5));
  double Q = 0.0;
  for (int k = 0; k < n; ++k) Q += q(k) * (e[k + 1] - e[k]);
  return 1.0 / Q;
}

double angle_over_pi(C s) {
  return (std::atan((s.real() + 1.0) / s.imag()) - std::atan((s.real() - 1.0) / s.imag())) / kPi;
}

}  // namespace

TEST(RiemannInvariant, AgreesWithPanelCondenser) {
  for (double h : {0.3, 1.0, 2.0}) {
    const AnnulusData& d = annulus(h);
    EXPECT_NEAR(d.log_rho, log_rho_panels(h, 800), 2e-4 * d.log_rho) << "h = " << h;
    EXPECT_LE(d.refinement_change, 1e-8);
    EXPECT_LE(d.symmetry_defect, 1e-10);
    EXPECT_NEAR(d.capacity, 2.0 * kPi / d.log_rho, 1e-12 * d.capacity);
  }
}

TEST(RiemannInvariant, IncreasesWithSeparation) {
  EXPECT_GT(annulus(2.0).rho, annulus(1.0).rho);
  EXPECT_GT(annulus(1.0).rho, annulus(0.5).rho);
  EXPECT_GT(annulus(0.5).rho, 1.0);
  EXPECT_THROW(riemann_invariant(1.0, 16), RangeError);
  EXPECT_THROW(riemann_invariant(-1.0), RangeError);
}

TEST(RiemannInvariant, MatchesEigenvalueDecay) {
  for (double h : {0.5, 1.0, 2.0}) {
    const DecayRate r = decay_rate(eigen(build_operator(h)));
    EXPECT_LT(std::abs(annulus(h).log_rho - r.alpha), 0.02 * r.alpha) << "h = " << h;
  }
}

TEST(AbsPsi, BoundaryCalibration) {
  for (double h : {0.5, 1.0, 2.0}) {
    const AnnulusData& d = annulus(h);
    for (double x : {-3.0, -0.5, 0.0, 0.7, 10.0}) EXPECT_NEAR(abs_psi(C(x, 0.0), d), 1.0, 1e-6);
    const double target = 1.0 / std::sqrt(d.rho);
    for (double x : {-0.6, 0.0, 0.3}) {
      EXPECT_NEAR(abs_psi(C(x, h * (1.0 + 1e-10)), d), target, 1e-6) << "h = " << h << ", x = " << x;
      EXPECT_NEAR(abs_psi(C(x, h * (1.0 - 1e-10)), d), target, 1e-6) << "h = " << h << ", x = " << x;
      EXPECT_NEAR(abs_psi(C(x, -h * (1.0 - 1e-10)), d), 1.0 / target, 1e-6 / target);
    }
    EXPECT_THROW(abs_psi(C(0.2, h), d), DomainError);
  }
}

TEST(AbsPsi, SandwichOffTheSlit) {
  const AnnulusData& d = annulus(1.0);
  double prev = 0.0;
  for (double w0 : {1.05, 1.5, 2.0, 4.0, 8.0}) {
    const double a = abs_psi(C(w0, 1.0), d);
    EXPECT_GT(a, 1.0 / std::sqrt(d.rho));
    EXPECT_LT(a, 1.0);
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(AbsPsi, ModulusOfPsiMatches) {
  const AnnulusData& d = annulus(1.0);
  for (C z : {C(2.0, 1.0), C(0.3, 0.4), C(-1.5, -0.2)}) EXPECT_NEAR(std::abs(psi(z, d)), abs_psi(z, d), 1e-13);
}

TEST(Gamma1, DecreasingAndEndpointLimit) {
  const AnnulusData& d = annulus(1.0);
  double prev = 1.0;
  for (double w0 : {1.1, 1.5, 2.0, 3.0, 6.0}) {
    const double g = gamma1_annulus(w0, d).printed;
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_NEAR(gamma1_annulus(1.0 + 1e-9, d).printed, 0.5, 1e-3);
  const Gamma1Annulus g = gamma1_annulus(2.0, d);
  EXPECT_DOUBLE_EQ(g.factor2, 2.0 * g.printed);
  EXPECT_THROW(gamma1_annulus(0.9, d), RangeError);
}

TEST(Gamma1, BestVariantTracksMeasuredExponent) {
  for (double h : {0.6, 1.0, 2.0}) {
    const SpectralOperator S = build_spectral_operator(h);
    const double measured = gamma_from_sweep(S, 2.0, log_grid(1e-4, 1e-1, 4)).from_D.gamma;
    const Gamma1Annulus g = gamma1_annulus(2.0, annulus(h), measured);
    const double best = g.closest == 1 ? g.factor2 : g.printed;
    EXPECT_LT(std::abs(best - measured), 0.1 * measured) << "h = " << h;
  }
}

TEST(Profile, TruncationAndScalingAcrossTheStrip) {
  const AnnulusData& d = annulus(1.0);
  const double w0 = 2.0;
  const ProfileValue auto_n = near_optimal_profile(C(0.0, 0.5), w0, 1e-3, d);
  const ProfileValue fixed = near_optimal_profile(C(0.0, 0.5), w0, 1e-3, d, 4 * auto_n.n_terms);
  EXPECT_LT(std::abs(auto_n.value - fixed.value), 1e-11 * std::abs(fixed.value));
  // |u| on the slit over |u| on the real line scales like eps^1.
  std::vector<double> le, lr;
  for (double eps : log_grid(1e-5, 1e-2, 8)) {
    const double top = std::abs(near_optimal_profile(C(0.0, 1.0 - 1e-9), w0, eps, d).value);
    const double bottom = std::abs(near_optimal_profile(C(0.0, 0.0), w0, eps, d).value);
    le.push_back(std::log(eps));
    lr.push_back(std::log(top / bottom));
  }
  EXPECT_NEAR(fit_line(le, lr).slope, 1.0, 0.05);
}

TEST(Profile, GrowthAtOmega0FollowsGamma1) {
  const AnnulusData& d = annulus(1.0);
  const double w0 = 2.0;
  std::vector<double> le, lv;
  for (double eps : log_grid(1e-6, 1e-2, 8)) {
    le.push_back(std::log(eps));
    lv.push_back(std::log(std::abs(near_optimal_profile(C(0.0, 0.0), w0, eps, d).value)));
  }
  // On the real line |u| ~ eps^{-2 theta_R}, theta_R = 1 + ln|Psi(w0 + ih)| / ln rho.
  const double theta_r = 1.0 + std::log(abs_psi(C(w0, 1.0), d)) / d.log_rho;
  EXPECT_NEAR(fit_line(le, lv).slope, -2.0 * theta_r, 0.05);
}

TEST(AppendixBounds, ClosedFormValues) {
  EXPECT_NEAR(appendix_bounds(2.0, 2.0).alpha0, 0.25, 1e-15);
  EXPECT_NEAR(appendix_bounds(2.0, 1.0).beta0, std::atan2(12.0, 5.0) / kPi, 1e-15);
  EXPECT_NEAR(appendix_bounds(2.0, 1.0).beta0, 0.374334, 1e-6);
  EXPECT_NEAR(appendix_bounds(2.0, 1.0).rho_disc, 4.0 - std::sqrt(15.0), 1e-15);
  const AppendixBounds b = appendix_bounds(3.0, 0.7);
  EXPECT_NEAR(b.alpha_omega0, angle_over_pi(C(3.0, 0.7)), 1e-14);
  EXPECT_NEAR(std::abs(b.z0), 0.5 * std::sqrt(4 * 0.49 + 8 * 0.7 + 3.0), 1e-15);
  EXPECT_THROW(appendix_bounds(0.5, 1.0), RangeError);
}

TEST(AppendixBounds, OrderingAndSmallHTrend) {
  for (double h : {0.5, 1.0, 2.0})
    for (double w0 : {1.5, 2.0, 4.0}) EXPECT_TRUE(appendix_bounds(w0, h).ordered) << h << " " << w0;
  for (double w0 : {1.5, 2.0, 4.0})
    EXPECT_LT(appendix_bounds(w0, 0.05).gamma1_lower_route, appendix_bounds(w0, 0.1).gamma1_lower_route);
}

TEST(AnsatzG, ModulusIdentity) {
  const C s(2.0, 1.0);
  for (double delta : {0.1, 0.01})
    for (C z : {C(0.3, 0.2), C(-2.0, 0.5), C(1.5, 3.0), C(0.0, 1e-3)}) {
      const double expected = std::pow(delta, angle_over_pi(z)) / std::abs(z - std::conj(s));
      EXPECT_NEAR(std::abs(ansatz_G(z, s, delta)), expected, 1e-12 * expected);
    }
  EXPECT_LT(std::abs(ansatz_G(C(0.4, 0.7), s, 1.0 - 1e-12) - 1.0 / (C(0.4, 0.7) - std::conj(s))), 1e-10);
  EXPECT_THROW(ansatz_G(C(1.0, 0.0), s, 0.1), DomainError);
  EXPECT_THROW(ansatz_G(C(0.3, 0.2), s, 1.5), RangeError);
}

TEST(AnsatzG, BandNormFollowsAlphaZero) {
  // Norm on (-1, 1) + ih against delta^{alpha0}, alpha0 = arctan(2/h)/pi, for s = ih and h = 1.
  const double h = 1.0;
  const C s(0.0, h);
  std::vector<double> ratio;
  for (double delta : {1e-2, 1e-4, 1e-6}) {
    auto f = [&](double x) { return std::norm(ansatz_G(C(x, h), s, delta)); };
    const double n = std::sqrt(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0, 15, 1e-12));
    ratio.push_back(n / std::pow(delta, std::atan(2.0 / h) / kPi));
  }
  for (double r : ratio) {
    EXPECT_GT(r, 0.1 * ratio[0]);
    EXPECT_LT(r, 10.0 * ratio[0]);
  }
}
