#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

#include "permext/errors.hpp"
#include "permext/fredholm.hpp"

namespace permext {

namespace {

// Gauss-Legendre panels on [0, x_max] in x = sqrt(t): one panel on [0, x_min],
// then n_panels log-spaced panels.
void measure_rule(std::vector<double>& x, std::vector<double>& w) {
  constexpr int kPerPanel = 20, kPanels = 120;
  constexpr double kXmin = 1e-3, kXmax = 2000.0;
  std::vector<double> edges{0.0};
  for (int k = 0; k <= kPanels; ++k)
    edges.push_back(kXmin * std::pow(kXmax / kXmin, static_cast<double>(k) / kPanels));
  x.clear();
  w.clear();
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const Quadrature q = gauss_legendre(kPerPanel, edges[k], edges[k + 1]);
    x.insert(x.end(), q.nodes.begin(), q.nodes.end());
    w.insert(w.end(), q.weights.begin(), q.weights.end());
  }
}

struct SplitMeasure {
  std::vector<double> t;
  std::vector<double> plus, minus;  // masses of the positive and negative parts
  double atom = 0.0;
};

struct Candidate {
  double eps_inner = 0.0;
  SplitMeasure m;
  double psi_band = 0.0;  // ||psi||_{L2(-1,1)} of the discretised psi
  double sep = 0.0;       // |psi(w0)|
  double s = 0.0;         // max dual norm of the two parts
  double amplitude = 0.0;
  double objective = 0.0;  // amplitude * sep / (1 + amplitude * s)
};

constexpr double kMaxAmplitude = 1e6;

StieltjesRational part(const SplitMeasure& m, bool positive, double scale, double ref_mass, double h) {
  std::vector<double> nodes{0.0};
  std::vector<double> masses{ref_mass + scale * std::max(positive ? m.atom : -m.atom, 0.0)};
  const auto& src = positive ? m.plus : m.minus;
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    const double v = scale * src[i];
    if (v > 0.0) {
      nodes.push_back(m.t[i]);
      masses.push_back(v);
    }
  }
  if (masses[0] <= 0.0) {
    nodes.erase(nodes.begin());
    masses.erase(masses.begin());
  }
  return StieltjesRational(0.0, h, std::move(nodes), std::move(masses));
}

double band_l2(const StieltjesRational& a, const StieltjesRational& b, const Quadrature& band) {
  double s = 0.0;
  for (std::size_t k = 0; k < band.nodes.size(); ++k) {
    const cplx w(band.nodes[k], 0.0);
    s += band.weights[k] * std::norm(a(w) - b(w));
  }
  return std::sqrt(s);
}

class PairBuilder {
 public:
  PairBuilder(const SpectralOperator& S, double omega0, double eps)
      : S_(S), w0_(omega0, 0.0), eps_(eps), band_(gauss_legendre(400, -1.0, 1.0)) {
    measure_rule(x_, wx_);
    pp_ = p_vector(w0_, S.op);
    pm_ = p_vector(-w0_, S.op);
    pn2_ = p_norm2(w0_, S.op.h);
    cross_ = reproducing_kernel(-w0_, w0_, S.op.h);
  }

  Candidate evaluate(double eps_inner) const {
    const double h = S_.op.h;
    const SymmetricBound sb = bound_D_symmetric(S_, w0_.real(), eps_inner);
    if (!std::isfinite(sb.eta)) throw RangeError("worst_case_pair: constraint inactive at the inner level");
    const cplx lam = sb.lambda_star;
    const Eigen::VectorXcd q = 0.5 * (lam * pp_ + std::conj(lam) * pm_);
    const double qn2 = 0.5 * pn2_ + 0.5 * (lam * lam * cross_).real();
    const RegularizedSolution sol = solve_regularized(S_.op, q, sb.eta);
    const ModalRhs::Parts lp = linear_parts(S_.op, q, qn2, sol.g, sb.eta);
    const double unorm = std::sqrt(lp.norm2_h2);

    // Normalised symmetric maximiser, evaluated up to the boundary line Im w = -h.
    auto phi = [&](cplx w) {
      const cplx qv = 0.5 * (lam * reproducing_kernel(w, w0_, h) + std::conj(lam) * reproducing_kernel(w, -w0_, h));
      cplx rg = 0.0;
      for (Eigen::Index j = 0; j < sol.g.size(); ++j)
        rg += reproducing_kernel(w, cplx(S_.op.quad.nodes[j], 0.0), h) * S_.op.sqrt_w(j) * sol.g(j);
      return (qv - rg) / sb.eta / unorm;
    };

    Candidate c;
    c.eps_inner = eps_inner;
    c.m.atom = -phi(cplx(0.0, -h)).real();
    c.m.t.resize(x_.size());
    c.m.plus.resize(x_.size());
    c.m.minus.resize(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double dens = 2.0 / (kPi * x_[i]) * phi(cplx(x_[i], -h)).imag();
      c.m.t[i] = x_[i] * x_[i];
      c.m.plus[i] = wx_[i] * std::max(dens, 0.0);
      c.m.minus[i] = wx_[i] * std::max(-dens, 0.0);
    }
    const StieltjesRational P = part(c.m, true, 1.0, 0.0, h);
    const StieltjesRational M = part(c.m, false, 1.0, 0.0, h);
    c.psi_band = band_l2(P, M, band_);
    c.sep = std::abs(P(w0_) - M(w0_));
    c.s = std::max(dual_norm(P), dual_norm(M));
    // Largest amplitude keeping c * psi_band <= eps * (1 + c * s).
    const double excess = c.psi_band - eps_ * c.s;
    c.amplitude = excess > 0.0 ? std::min(eps_ / excess * (1.0 - 1e-9), kMaxAmplitude) : kMaxAmplitude;
    c.objective = c.amplitude * c.sep / (1.0 + c.amplitude * c.s);
    return c;
  }

  const Quadrature& band() const { return band_; }

 private:
  const SpectralOperator& S_;
  cplx w0_;
  double eps_;
  Quadrature band_;
  std::vector<double> x_, wx_;
  Eigen::VectorXcd pp_, pm_;
  double pn2_ = 0.0;
  cplx cross_ = 0.0;
};

}  // namespace

MaximizerPair worst_case_pair(const SpectralOperator& S, double omega0, double eps) {
  ProblemParams pp;
  pp.h = S.op.h;
  pp.omega0 = omega0;
  pp.eps = eps;
  pp.n_nodes = static_cast<int>(S.op.size());
  pp.validate();
  if (eps < kEpsHardFloor) throw RangeError("worst_case_pair: eps below the binary64 precision floor");
  const double h = S.op.h;
  const PairBuilder builder(S, omega0, eps);

  // The inner level trades band smallness of psi against its size at w0.
  const double lo = std::log(std::max(eps * 1e-3, kEpsHardFloor * 1.0001));
  const double hi = std::log(eps);
  constexpr int kScan = 13;
  double best_u = hi, best = -1.0;
  for (int k = 0; k < kScan; ++k) {
    const double u = lo + (hi - lo) * k / (kScan - 1);
    const double v = builder.evaluate(std::exp(u)).objective;
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  const double step = (hi - lo) / (kScan - 1);
  auto neg = [&](double u) { return -builder.evaluate(std::exp(u)).objective; };
  const auto ref = boost::math::tools::brent_find_minima(neg, std::max(lo, best_u - step), std::min(hi, best_u + step), 20);
  if (-ref.second > best) best_u = ref.first;
  const Candidate c = builder.evaluate(std::exp(best_u));

  MaximizerPair out;
  out.F = part(c.m, true, c.amplitude, 1.0, h);
  out.G = part(c.m, false, c.amplitude, 1.0, h);
  out.scale = std::max(dual_norm(out.F), dual_norm(out.G));
  out.band_mismatch = band_l2(out.F, out.G, builder.band());
  const cplx w0(omega0, 0.0);
  out.separation_at_omega0 = std::abs(out.F(w0) - out.G(w0));
  out.D = bound_D_symmetric(S, omega0, eps).D_sym;
  out.eps = eps;
  out.eps_inner = c.eps_inner;
  out.amplitude = c.amplitude;
  out.atom_at_zero = c.m.atom;

  std::vector<double> xs;
  for (int k = 1; k <= 400; ++k) xs.push_back(100.0 * k / 400.0);
  for (const StieltjesRational* f : {&out.F, &out.G}) {
    const PositivityScan ps = positivity_scan([f](cplx w) { return (*f)(w); }, h, 0.5 * h, xs);
    if (!ps.ok) throw InvariantError("worst_case_pair: constructed member fails the positivity scan");
  }
  return out;
}

MaximizerPair worst_case_pair(const ProblemParams& params) {
  params.validate();
  const SpectralOperator S = build_spectral_operator(params.h, params.n_nodes);
  return worst_case_pair(S, params.omega0, params.eps);
}

}  // namespace permext
