#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "permext/errors.hpp"
#include "permext/quadop.hpp"
#include "permext/stieltjes.hpp"

using namespace permext;

namespace {

StieltjesRational random_model(std::mt19937_64& rng, double h, bool with_rho = true) {
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> logt(-2.0, 3.0), mass(0.05, 2.0), rho(0.0, 1.5);
  std::vector<double> t;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) t.push_back(std::pow(10.0, logt(rng)));
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::vector<double> s;
  for (std::size_t k = 0; k < t.size(); ++k) s.push_back(mass(rng));
  return StieltjesRational(with_rho ? rho(rng) : 0.0, h, t, s);
}

// int_0^inf dl / ((l + a)^2 (l - z)) for z off [0, inf); the boundary value on the cut is
// taken from the side Im z -> sign(side) * 0.
cplx inverse_square_transform(double a, cplx z, double side) {
  cplx l = std::log(-z / a);
  if (z.imag() == 0.0 && z.real() > 0.0) l = cplx(std::log(z.real() / a), side > 0 ? -kPi : kPi);
  return -l / ((a + z) * (a + z)) - 1.0 / (a * (a + z));
}

Evaluator density_model(double h, double c1, double a1, double c2, double a2) {
  return [=](cplx w) {
    const cplx z = (w + cplx(0.0, h)) * (w + cplx(0.0, h));
    return c1 * inverse_square_transform(a1, z, w.real()) + c2 * inverse_square_transform(a2, z, w.real());
  };
}

}  // namespace

TEST(Stieltjes, EvaluatesSingleNodeAtImaginaryUnit) {
  const StieltjesRational f(0.0, 1.0, {0.0}, {1.0});
  const cplx v = eval_stieltjes(f, cplx(0.0, 1.0));
  EXPECT_NEAR(v.real(), 0.25, 1e-15);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(Stieltjes, ConstantModel) {
  const StieltjesRational f(2.0, 0.7, {}, {});
  for (cplx w : {cplx(0.3, 0.0), cplx(-5.0, 2.0), cplx(100.0, -0.5)}) EXPECT_EQ(eval_stieltjes(f, w), cplx(2.0));
}

TEST(Stieltjes, PlasmaLimitAtLargeFrequency) {
  const StieltjesRational f(0.0, 0.5, {1.0}, {1.0});
  const cplx v = eval_stieltjes(f, cplx(10.0, 0.0));
  const double leading = -1.0 / 100.0;
  EXPECT_LT(std::abs(v.real() - leading), 0.03 * std::abs(leading));
}

TEST(Stieltjes, PlasmaLimitAlongImaginaryAxis) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const StieltjesRational f = random_model(rng, 0.8, false);
    double sig = 0.0, tmax = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      sig += f.masses()[j];
      tmax = std::max(tmax, f.nodes()[j]);
    }
    const double R = 1e3 * std::max(std::sqrt(tmax), 1.0);
    const cplx w(0.0, R);
    EXPECT_LT(std::abs(w * w * eval_stieltjes(f, w) + sig), 0.01 * sig);
  }
}

TEST(Stieltjes, RejectsPointsBelowTheStrip) {
  const StieltjesRational f(0.0, 1.0, {1.0}, {1.0});
  EXPECT_THROW(eval_stieltjes(f, cplx(0.0, -1.0)), DomainError);
  EXPECT_THROW(eval_stieltjes(f, cplx(0.0, -2.0)), DomainError);
  EXPECT_THROW(StieltjesRational(0.0, 1.0, {1.0}, {-1.0}), DomainError);
  EXPECT_THROW(StieltjesRational(-1.0, 1.0, {}, {}), DomainError);
}

TEST(Stieltjes, DualNorm) {
  EXPECT_DOUBLE_EQ(dual_norm(StieltjesRational(0.0, 1.0, {0.0}, {1.0})), 1.0);
  EXPECT_DOUBLE_EQ(dual_norm(StieltjesRational(0.0, 1.0, {3.0}, {2.0})), 0.5);
  EXPECT_DOUBLE_EQ(dual_norm(StieltjesRational(0.0, 1.0, {0.0, 3.0}, {1.0, 2.0})), 1.5);
}

TEST(Symmetry, ApplySOnAlgebraicExamples) {
  const auto grid = symmetric_grid({0.0, 0.5, 1.0, 2.0}, {0.0, 0.3, 1.0});
  const GridFunction iw = GridFunction::sample([](cplx w) { return cplx(0.0, 1.0) * w; }, grid);
  const GridFunction s1 = apply_S(iw);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(std::abs(s1.values[i] - iw.values[i]), 1e-15);

  const GridFunction id = GridFunction::sample([](cplx w) { return w; }, grid);
  const GridFunction s2 = apply_S(id);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(std::abs(s2.values[i] + id.values[i]), 1e-15);

  const double h = 0.6;
  const GridFunction r = GridFunction::sample(
      [h](cplx w) { return 1.0 / (1.0 - (w + cplx(0.0, h)) * (w + cplx(0.0, h))); }, grid);
  const GridFunction s3 = apply_S(r);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(std::abs(s3.values[i] - r.values[i]), 1e-13);
}

TEST(Symmetry, RejectsGridNotClosedUnderReflection) {
  GridFunction g = GridFunction::sample([](cplx w) { return w; }, {cplx(1.0, 0.0), cplx(2.0, 0.0)});
  EXPECT_THROW(apply_S(g), GridError);
}

TEST(Symmetry, DefectOfModelsAndOfIdentity) {
  std::mt19937_64 rng(3);
  const auto grid = symmetric_grid({0.0, 0.1, 0.7, 1.3, 5.0}, {-0.2, 0.0, 0.4, 2.0});
  for (int trial = 0; trial < 50; ++trial) {
    const StieltjesRational f = random_model(rng, 0.5);
    EXPECT_LE(symmetry_defect(GridFunction::sample([&](cplx w) { return f(w); }, grid)), 1e-12);
  }
  const std::vector<cplx> real_grid = symmetric_grid({0.2, 1.0, 3.0}, {0.0});
  EXPECT_NEAR(symmetry_defect(GridFunction::sample([](cplx w) { return w; }, real_grid)), 6.0, 1e-15);
}

TEST(Symmetry, DefectMeasuresTwiceTheAntisymmetricPart) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const auto grid = symmetric_grid({0.0, 0.25, 0.5, 1.5}, {0.0, 0.5});
  // Symmetric part: a + S a; antisymmetric part: b - S b, built explicitly from raw samples.
  std::map<std::pair<double, double>, std::pair<cplx, cplx>> raw;
  for (cplx w : grid) raw[{w.real(), w.imag()}] = {cplx(n01(rng), n01(rng)), cplx(n01(rng), n01(rng))};
  GridFunction g;
  g.grid = grid;
  double anti_max = 0.0;
  for (cplx w : grid) {
    const auto& [a, b] = raw[{w.real(), w.imag()}];
    const auto& [am, bm] = raw[{-w.real(), w.imag()}];
    const cplx sym = a + std::conj(am);
    const cplx anti = b - std::conj(bm);
    g.values.push_back(sym + anti);
    anti_max = std::max(anti_max, std::abs(anti));
  }
  EXPECT_NEAR(symmetry_defect(g), 2.0 * anti_max, 1e-13);
}

TEST(Positivity, SingleNodeHoldsOnTheWiderStrip) {
  const StieltjesRational f(0.2, 1.0, {2.0}, {1.0});
  std::vector<double> xs;
  for (int k = 1; k <= 1000; ++k) xs.push_back(0.1 * k);
  for (double frac : {0.25, 0.5, 0.75}) {
    const auto r = positivity_scan([&](cplx w) { return f(w); }, 1.0, frac, xs);
    EXPECT_TRUE(r.ok) << "h' = " << frac;
  }
}

TEST(Positivity, RandomModelsHoldOnTheWiderStrip) {
  std::mt19937_64 rng(17);
  std::vector<double> xs;
  for (int k = 1; k <= 400; ++k) xs.push_back(0.25 * k);
  for (int trial = 0; trial < 20; ++trial) {
    const StieltjesRational f = random_model(rng, 1.2);
    for (double frac : {0.25, 0.5, 0.75})
      EXPECT_TRUE(positivity_scan([&](cplx w) { return f(w); }, 1.2, frac * 1.2, xs).ok);
  }
}

TEST(Positivity, CounterexampleFailsTheScan) {
  auto f = [](cplx w) {
    const cplx a = w + cplx(0.0, 3.0);
    return -(w + cplx(0.0, 1.0)) / (a * a * a);
  };
  std::vector<double> xs;
  for (int k = 1; k <= 1000; ++k) xs.push_back(0.1 * k);
  const auto r = positivity_scan(f, 3.0, 1.0, xs);
  EXPECT_FALSE(r.ok);
  EXPECT_LT(r.min_im, 0.0);
}

TEST(Positivity, ConstantIsOnTheBoundary) {
  const auto r = positivity_scan([](cplx) { return cplx(0.7, 0.0); }, 1.0, 0.5, {0.5, 1.0, 10.0});
  EXPECT_EQ(r.min_im, 0.0);
  EXPECT_FALSE(r.ok);
}

TEST(MeasureDensity, ClosedFormOracleMatchesQuadrature) {
  // The oracle used below, checked against a direct quadrature of the representation.
  const double h = 0.5;
  const cplx w(0.7, 0.2);
  const cplx z = (w + cplx(0.0, h)) * (w + cplx(0.0, h));
  const auto re = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double u) {
        const double l = u / (1.0 - u);
        return (1.0 / ((1.0 + l) * (1.0 + l) * (l - z))).real() / ((1.0 - u) * (1.0 - u));
      },
      0.0, 1.0, 25, 1e-14);
  const auto im = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double u) {
        const double l = u / (1.0 - u);
        return (1.0 / ((1.0 + l) * (1.0 + l) * (l - z))).imag() / ((1.0 - u) * (1.0 - u));
      },
      0.0, 1.0, 25, 1e-14);
  const cplx closed = density_model(h, 1.0, 1.0, 0.0, 1.0)(w);
  EXPECT_LT(std::abs(closed - cplx(re, im)), 1e-11);
}

TEST(MeasureDensity, RecoversAbsolutelyContinuousDensity) {
  const double h = 0.5;
  const Evaluator f = density_model(h, 1.0, 1.0, 0.0, 1.0);
  std::vector<double> lam;
  for (int k = 0; k <= 60; ++k) lam.push_back(0.05 + 0.25 * k);
  const auto d = measure_density_from_boundary(f, h, lam);
  for (std::size_t k = 0; k < lam.size(); ++k) EXPECT_NEAR(d[k], 1.0 / ((1.0 + lam[k]) * (1.0 + lam[k])), 1e-6);
}

TEST(MeasureDensity, RejectsAntisymmetricInput) {
  EXPECT_THROW(measure_density_from_boundary([](cplx w) { return w; }, 1.0, {1.0, 2.0}), DomainError);
}

TEST(MeasureDensity, SignedDifferenceSplitsIntoPositiveAndNegativeParts) {
  // d = 1/(1+l)^2 - 2/(2+l)^2 is positive for l < sqrt(2) and negative beyond.
  const double h = 0.8;
  const Evaluator f = density_model(h, 1.0, 1.0, -2.0, 2.0);
  const auto exact = [](double l) { return 1.0 / ((1.0 + l) * (1.0 + l)) - 2.0 / ((2.0 + l) * (2.0 + l)); };
  const Quadrature q = gauss_legendre(200, 0.0, 1.0);
  double plus = 0.0, minus = 0.0, plus_exact = 0.0, minus_exact = 0.0;
  std::vector<double> lam, jac;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double u = q.nodes[k];
    lam.push_back(u / (1.0 - u));
    jac.push_back(q.weights[k] / ((1.0 - u) * (1.0 - u)));
  }
  const auto d = measure_density_from_boundary(f, h, lam);
  for (std::size_t k = 0; k < lam.size(); ++k) {
    plus += jac[k] * std::max(d[k], 0.0);
    minus += jac[k] * std::max(-d[k], 0.0);
    plus_exact += jac[k] * std::max(exact(lam[k]), 0.0);
    minus_exact += jac[k] * std::max(-exact(lam[k]), 0.0);
  }
  EXPECT_NEAR(plus, plus_exact, 1e-8);
  EXPECT_NEAR(minus, minus_exact, 1e-8);
  EXPECT_NEAR(plus - minus, 0.0, 1e-4);  // both parts carry total mass one
  EXPECT_GT(plus, 0.0);
  EXPECT_GT(minus, 0.0);
}

TEST(HPrimeNorm, MatchesTheClosedFormKernel) {
  // ||f||_{h'}^2 = sum_jk s_j s_k I(t_j, t_k) / ((t_j + 1)(t_k + 1)).
  std::mt19937_64 rng(23);
  const double h = 1.0, hp = 0.5, d = h - hp;
  auto I = [d](double l, double t) {
    const double d2 = d * d;
    const double num = (l - t) * (l - t) + 12.0 * d2 * (l + t) + 96.0 * d2 * d2;
    const double den = (l - t) * (l - t) + 8.0 * d2 * (l + t) + 16.0 * d2 * d2;
    return kPi * (l + 1.0) * (t + 1.0) / (d * (l + 4.0 * d2) * (t + 4.0 * d2)) * num / den;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const StieltjesRational f = random_model(rng, h, false);
    double s2 = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
      for (std::size_t k = 0; k < f.size(); ++k)
        s2 += f.masses()[j] * f.masses()[k] * I(f.nodes()[j], f.nodes()[k]) /
              ((f.nodes()[j] + 1.0) * (f.nodes()[k] + 1.0));
    const LineNorm n = hprime_norm(f, hp);
    EXPECT_NEAR(n.value, std::sqrt(s2), 1e-8 * std::sqrt(s2));
  }
}

TEST(HPrimeNorm, RatioToDualNormStaysInOneBracket) {
  std::mt19937_64 rng(29);
  const double h = 1.0, hp = 0.5, d = h - hp;
  // I / ((l+1)(t+1)) lies between pi/(d (l+4d^2)(t+4d^2)) and 6 times that; with
  // (l+1)/(l+4d^2) in [min(1, 1/(4d^2)), max(1, 1/(4d^2))] this brackets the ratio.
  const double r = 1.0 / (4.0 * d * d);
  const double lo = std::sqrt(kPi / d) * std::min(1.0, r), hi = std::sqrt(6.0 * kPi / d) * std::max(1.0, r);
  double rmin = 1e300, rmax = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const StieltjesRational f = random_model(rng, h, false);
    const double ratio = hprime_norm(f, hp).value / dual_norm(f);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  EXPECT_GE(rmin, lo);
  EXPECT_LE(rmax, hi);
  const double single = hprime_norm(StieltjesRational(0.0, h, {0.0}, {1.0}), hp).value;
  EXPECT_GT(single, 0.0);
  EXPECT_TRUE(std::isfinite(single));
}

TEST(HPrimeNorm, HomogeneousAndZeroOnZero) {
  const StieltjesRational f(0.0, 1.0, {0.5, 4.0}, {1.0, 0.3});
  const StieltjesRational g(0.0, 1.0, {0.5, 4.0}, {3.0, 0.9});
  EXPECT_NEAR(hprime_norm(g, 0.5).value, 3.0 * hprime_norm(f, 0.5).value, 1e-10);
  EXPECT_EQ(hprime_norm([](cplx) { return cplx(0.0); }, 1.0, 0.5).value, 0.0);
  EXPECT_THROW(hprime_norm(f, 1.5), DomainError);
}

TEST(BandNorm, ElementaryFunctions) {
  const Quadrature q = gauss_legendre(8, 0.0, 1.0);
  std::vector<cplx> g(q.nodes.begin(), q.nodes.end());
  EXPECT_NEAR(band_norm(GridFunction::sample([](cplx) { return cplx(1.0); }, g), 0.0, 1.0, q.weights), 1.0, 1e-15);
  EXPECT_NEAR(band_norm(GridFunction::sample([](cplx w) { return w; }, g), 0.0, 1.0, q.weights), 1.0 / std::sqrt(3.0),
              1e-15);
}

TEST(BandNorm, StableUnderRuleRefinement) {
  const StieltjesRational f(0.3, 0.5, {0.2, 2.0}, {0.5, 1.0});
  auto norm_with = [&](int n) {
    const Quadrature q = gauss_legendre(n, 0.0, 1.0);
    std::vector<cplx> g(q.nodes.begin(), q.nodes.end());
    return band_norm(GridFunction::sample([&](cplx w) { return f(w); }, g), 0.0, 1.0, q.weights);
  };
  EXPECT_NEAR(norm_with(60), norm_with(600), 1e-10);
}

TEST(MeanReal, LimitValuesOfTheWeight) {
  const double h = 1.0;
  const double mu = mean_weight_infimum(h);
  EXPECT_GT(mu, 0.0);
  EXPECT_LE(mu, 1.0);
  EXPECT_LE(mu, 0.5 + 1e-12);
  EXPECT_NEAR(mean_weight(0.0, h), 0.5, 1e-15);
  EXPECT_NEAR(mean_weight(1e13, h), 1.0, 1e-12);
}

TEST(MeanReal, ZeroModel) {
  const MeanRealBound b = mean_real_lower_bound(StieltjesRational(0.0, 1.0, {}, {}));
  EXPECT_EQ(b.mean_real, 0.0);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_EQ(b.l2_norm, 0.0);
}

TEST(MeanReal, InequalityChainOnRandomModels) {
  std::mt19937_64 rng(31);
  const double h = 0.5;
  for (int trial = 0; trial < 30; ++trial) {
    const StieltjesRational f = random_model(rng, h);
    const MeanRealBound b = mean_real_lower_bound(f);
    // Independent quadrature of int_0^1 Re f.
    std::vector<double> cuts{0.0, 1.0};
    for (double t : f.nodes())
      if (std::sqrt(t) < 1.0) cuts.push_back(std::sqrt(t));
    std::sort(cuts.begin(), cuts.end());
    double mean = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      mean += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double w) { return f(cplx(w, 0.0)).real(); }, cuts[k], cuts[k + 1], 20, 1e-13);
    EXPECT_NEAR(b.mean_real, mean, 1e-9 * (1.0 + std::abs(mean)));
    EXPECT_GE(mean, b.lower * (1.0 - 1e-12));
    EXPECT_GE(b.norm_sum, b.c_h * b.l2_norm * (1.0 - 1e-12));
  }
}
