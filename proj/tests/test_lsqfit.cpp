#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "permext/errors.hpp"
#include "permext/lsqfit.hpp"

using namespace permext;

namespace {

const double kH = 0.5;

StieltjesRational truth() { return StieltjesRational(0.5, kH, {0.4, 3.0}, {0.3, 1.2}); }

// 2 Re sum_k W_k (f(x_k) - f_exp(x_k)) / (t - (x_k - ih)^2)^p with p = 1, 2.
double caprini_sum(const StieltjesRational& f, const ExperimentalData& d, double t, int power) {
  double s = 0.0;
  for (std::size_t k = 0; k < d.grid.size(); ++k) {
    const cplx den = t - std::pow(cplx(d.grid[k], -f.h()), 2);
    s += d.weights[k] * ((f(cplx(d.grid[k], 0.0)) - d.values[k]) / std::pow(den, power)).real();
  }
  return 2.0 * s;
}

double max_deviation(const StieltjesRational& a, const StieltjesRational& b) {
  double m = 0.0;
  for (double x = 0.0; x <= 3.0; x += 0.05)
    for (double y : {-0.25, 0.0, 1.0}) m = std::max(m, std::abs(a(cplx(x, y)) - b(cplx(x, y))));
  return m;
}

}  // namespace

TEST(Synthesize, ExactSamplesAndRule) {
  const ExperimentalData d = synthesize_band_data(truth(), 64, 0.0, 3);
  ASSERT_TRUE(d.has_rule());
  double wsum = 0.0;
  for (std::size_t k = 0; k < d.grid.size(); ++k) {
    EXPECT_EQ(d.values[k], truth()(cplx(d.grid[k], 0.0)));
    wsum += d.weights[k];
  }
  EXPECT_NEAR(wsum, 1.0, 1e-14);
  EXPECT_TRUE(std::is_sorted(d.grid.begin(), d.grid.end()));
}

TEST(Synthesize, SeedReproducibilityAndNoiseLevel) {
  std::vector<double> grid;
  for (int k = 0; k < 4000; ++k) grid.push_back(k / 3999.0);
  const double sigma = 1e-2;
  const ExperimentalData a = synthesize_data(truth(), grid, sigma, 42);
  const ExperimentalData b = synthesize_data(truth(), grid, sigma, 42);
  const ExperimentalData c = synthesize_data(truth(), grid, sigma, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  double s2 = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) s2 += std::norm(a.values[k] - truth()(cplx(grid[k], 0.0)));
  EXPECT_NEAR(std::sqrt(s2 / grid.size()), sigma, 0.1 * sigma);
  EXPECT_THROW(synthesize_data(truth(), {0.2, 1.5}, 0.0, 1), Error);
}

TEST(Caprini, VanishesForExactInterpolant) {
  const ExperimentalData d = synthesize_band_data(truth(), 100, 0.0, 1);
  for (double t : {0.0, 0.4, 1.0, 50.0, 1e4}) EXPECT_EQ(caprini_function(truth(), d, t), 0.0);
}

TEST(Caprini, AgreesWithDirectSumAndTail) {
  const ExperimentalData d = synthesize_band_data(truth(), 100, 1e-2, 5);
  const StieltjesRational model(0.45, kH, {0.5}, {1.4});
  for (double t : {0.0, 0.3, 2.0, 40.0}) {
    const double c = caprini_function(model, d, t);
    EXPECT_NEAR(c, caprini_sum(model, d, t, 1), 1e-13 * (1.0 + std::abs(c)));
  }
  const double tail = caprini_sum(model, d, 0.0, 0);
  EXPECT_NEAR(caprini_tail_exact(model, d), tail, 1e-13);
  EXPECT_NEAR(1e9 * caprini_function(model, d, 1e9), tail, 1e-6 * std::abs(tail));
}

TEST(Caprini, DerivativeMatchesFiniteDifferences) {
  const ExperimentalData d = synthesize_band_data(truth(), 100, 1e-2, 5);
  const StieltjesRational model(0.45, kH, {0.5}, {1.4});
  for (double t : {0.2, 1.0, 7.0}) {
    const double step = 1e-4 * (1.0 + t);
    const double fd = (caprini_function(model, d, t - 2 * step) - 8 * caprini_function(model, d, t - step) +
                       8 * caprini_function(model, d, t + step) - caprini_function(model, d, t + 2 * step)) /
                      (12.0 * step);
    const double dc = caprini_derivative(model, d, t);
    EXPECT_NEAR(dc, fd, 1e-8 * (1.0 + std::abs(dc)));
    EXPECT_NEAR(dc, -caprini_sum(model, d, t, 2), 1e-13 * (1.0 + std::abs(dc)));
  }
}

TEST(Fit, PlantedRecoveryNoiseFree) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentalData d = synthesize_band_data(truth(), 200, 0.0, 1);
  const FitResult r = fit_stieltjes(d, kH);
  ASSERT_EQ(r.model.size(), 2u);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(r.model.nodes()[j], truth().nodes()[j], 1e-4 * truth().nodes()[j]);
    EXPECT_NEAR(r.model.masses()[j], truth().masses()[j], 1e-4 * truth().masses()[j]);
  }
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_TRUE(r.certificate.ok);
  EXPECT_TRUE(r.converged);
  for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1] * (1.0 + 1e-12));
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 30.0);
}

TEST(Fit, NoisyDataWithinNoiseScale) {
  const double sigma = 1e-3;
  const ExperimentalData d = synthesize_band_data(truth(), 200, sigma, 7);
  const FitResult r = fit_stieltjes(d, kH);
  EXPECT_LE(r.residual, 1.5 * sigma);
  EXPECT_TRUE(r.certificate.ok);
  for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1] * (1.0 + 1e-12));
  for (double m : r.model.masses()) EXPECT_GT(m, 0.0);
  EXPECT_GE(r.model.rho_star(), 0.0);
}

TEST(Fit, ConstantDataGiveNoNodes) {
  ExperimentalData d = synthesize_band_data(StieltjesRational(2.0, kH, {}, {}), 80, 0.0, 1);
  const FitResult r = fit_stieltjes(d, kH);
  EXPECT_NEAR(r.model.rho_star(), 2.0, 1e-10);
  EXPECT_EQ(r.model.size(), 0u);
  EXPECT_TRUE(r.certificate.ok);
  for (auto& v : d.values) v = 0.0;
  EXPECT_THROW(fit_stieltjes(d, kH), DomainError);
}

TEST(Fit, UniqueMinimiserFromDifferentStarts) {
  const ExperimentalData d = synthesize_band_data(truth(), 200, 1e-3, 11);
  FitOptions a, b;
  a.initial_nodes = {0.05, 8.0};
  b.initial_nodes = {1.0, 2.0, 20.0, 100.0};
  const FitResult ra = fit_stieltjes(d, kH, a), rb = fit_stieltjes(d, kH, b);
  EXPECT_NEAR(ra.residual, rb.residual, 1e-8);
  double dv = 0.0;
  for (int k = 0; k <= 200; ++k) dv = std::max(dv, std::abs(ra.model(cplx(k / 200.0, 0.0)) - rb.model(cplx(k / 200.0, 0.0))));
  EXPECT_LE(dv, 1e-6);
}

TEST(Fit, StabilityAsNoiseVanishes) {
  double prev = 1e300;
  for (double sigma : {1e-2, 1e-3, 1e-4}) {
    const FitResult r = fit_stieltjes(synthesize_band_data(truth(), 200, sigma, 3), kH);
    const double dev = max_deviation(r.model, truth());
    EXPECT_LT(dev, prev) << "sigma = " << sigma;
    prev = dev;
  }
}

TEST(Certify, TruthPassesPerturbedFails) {
  const ExperimentalData d = synthesize_band_data(truth(), 200, 0.0, 1);
  EXPECT_TRUE(certify(truth(), d).ok);
  const CapriniCertificate bad = certify(StieltjesRational(0.5, kH, {0.4, 3.0}, {0.6, 1.2}), d);
  EXPECT_FALSE(bad.ok);
  const double node_tol = bad.tol;
  const bool violated = bad.min_C < -bad.tol ||
                        std::any_of(bad.node_values.begin(), bad.node_values.end(), [&](double v) { return v > node_tol; });
  EXPECT_TRUE(violated);
}

TEST(Certify, TailSkippedWithoutBackground) {
  const StieltjesRational f(0.0, kH, {0.4, 3.0}, {0.3, 1.2});
  const ExperimentalData d = synthesize_band_data(f, 200, 0.0, 1);
  const CapriniCertificate c = certify(f, d);
  EXPECT_TRUE(c.ok);
  EXPECT_TRUE(std::isfinite(c.tail_limit));
  EXPECT_EQ(c.t_grid.front(), 0.0);
}

TEST(Variation, IdentityForAtomicCompetitors) {
  const ExperimentalData d = synthesize_band_data(truth(), 200, 1e-2, 9);
  const FitResult fit = fit_stieltjes(d, kH);
  const StieltjesRational& m = fit.model;
  const VariationCheck same = variation_identity_check(m, m, d);
  EXPECT_EQ(same.lhs, 0.0);
  EXPECT_NEAR(same.rhs, 0.0, 1e-15);

  std::vector<double> nodes = m.nodes(), masses = m.masses();
  nodes.push_back(7.0);
  masses.push_back(1e-3);
  const VariationCheck add = variation_identity_check(m, StieltjesRational(m.rho_star(), kH, nodes, masses), d);
  EXPECT_NEAR(add.lhs, add.rhs, 1e-10 * (1.0 + std::abs(add.lhs)));
  // First order in an added mass delta at t0 is delta C(t0); Richardson in delta removes the quadratic term.
  const StieltjesRational base(0.45, kH, {0.5}, {1.4});
  auto g = [&](double delta) {
    return variation_identity_check(base, StieltjesRational(0.45, kH, {0.5, 7.0}, {1.4, delta}), d).lhs / delta;
  };
  const double c7 = caprini_function(base, d, 7.0);
  EXPECT_NEAR(2.0 * g(5e-4) - g(1e-3), c7, 1e-8 * std::abs(c7));

  const VariationCheck shift =
      variation_identity_check(m, StieltjesRational(m.rho_star() + 0.05, kH, {0.2, 5.0}, {0.1, 0.7}), d);
  EXPECT_NE(shift.delta_rho_term, 0.0);
  EXPECT_NEAR(shift.lhs, shift.rhs, 1e-10 * (1.0 + std::abs(shift.lhs)));
}

TEST(Nnls, KnownSolutions) {
  Eigen::MatrixXd A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  const Eigen::VectorXd x = nnls(A, Eigen::Vector3d(1.0, -1.0, 0.0));
  EXPECT_NEAR(x(0), 0.5, 1e-14);
  EXPECT_NEAR(x(1), 0.0, 1e-14);
  const Eigen::VectorXd y = nnls(A, Eigen::Vector3d(1.0, 2.0, 3.0));
  EXPECT_NEAR(y(0), 1.0, 1e-14);
  EXPECT_NEAR(y(1), 2.0, 1e-14);
}
