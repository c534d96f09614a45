#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "cli_support.hpp"
#include "permext/conformal.hpp"
#include "permext/errors.hpp"
#include "permext/exponent.hpp"
#include "permext/fredholm.hpp"
#include "permext/io.hpp"
#include "permext/lsqfit.hpp"

namespace permext::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CertificationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out;
  std::string cache_dir;
  int nodes = kDefaultNodes;
  unsigned threads = 0;
};

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// JSON cannot carry NaN; missing numbers become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void emit_json(const Common& c, const json& doc) {
  Sink sink(c.out);
  sink.stream() << doc.dump(2) << '\n';
}

std::ostream& precise(std::ostream& os) { return os << std::setprecision(17); }

void require_band(double band) {
  if (!(band > 0.0) || !std::isfinite(band)) throw UsageError("--band must be positive");
}

json bound_json(const BoundResult& b) {
  return {{"h", b.params.h},
          {"omega0", b.params.omega0},
          {"eps", b.params.eps},
          {"n_nodes", b.params.n_nodes},
          {"D", b.D},
          {"eta", b.eta},
          {"u_at_omega0", b.u_at_omega0},
          {"norm_H2", b.norm_H2},
          {"norm_L2", b.norm_L2},
          {"kkt_residual", b.kkt_residual},
          {"activity_residual", b.activity_residual},
          {"D_spectral", b.D_spectral},
          {"constraint_active", b.constraint_active},
          {"low_precision", b.low_precision}};
}

json estimate_json(const GammaEstimate& g) {
  return {{"gamma", num(g.gamma)},  {"method", to_string(g.method)}, {"std_error", num(g.std_error)},
          {"r2", num(g.r2)},        {"range_lo", g.range_lo},         {"range_hi", g.range_hi}};
}

json model_json(const StieltjesRational& m) { return json::parse(to_json(m)); }

json certificate_json(const CapriniCertificate& c) {
  double max_node = 0.0, max_deriv = 0.0;
  for (double v : c.node_values) max_node = std::max(max_node, v);
  for (double v : c.node_derivatives) max_deriv = std::max(max_deriv, v);
  return {{"ok", c.ok},
          {"tol", c.tol},
          {"min_C", c.min_C},
          {"argmin_t", c.argmin_t},
          {"max_abs_C_at_nodes", max_node},
          {"max_abs_dC_at_nodes", max_deriv},
          {"node_values", c.node_values},
          {"node_derivatives", c.node_derivatives},
          {"tail_limit", c.tail_limit},
          {"tail_exact", c.tail_exact},
          {"n_t_grid", c.t_grid.size()}};
}

ExperimentalData read_data(const std::string& path, double band) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file " + path);
  return read_band_csv(in, band);
}

// ---------------------------------------------------------------- bound

struct BoundArgs {
  double h = 1.0, omega0 = 2.0, eps = 1e-3, band = 1.0;
  bool symmetric = false;
  int phases = 64;
};

void run_bound(const Common& c, const BoundArgs& a) {
  require_band(a.band);
  ProblemParams p{a.h / a.band, a.omega0 / a.band, a.eps, c.nodes};
  p.validate();
  const SpectralOperator S = spectral_operator(p.h, p.n_nodes, c.cache_dir);
  json config = {{"h", a.h},       {"omega0", a.omega0}, {"eps", a.eps},          {"nodes", c.nodes},
                 {"band", a.band}, {"symmetric", a.symmetric}, {"phases", a.phases}};
  json doc = {{"metadata", metadata("bound", config)}};
  BoundResult b = bound_D0(S, p.omega0, p.eps);
  b.params = p;
  doc["result"] = bound_json(b);
  if (a.symmetric) {
    const SymmetricBound s = bound_D_symmetric(S, p.omega0, p.eps, a.phases);
    doc["symmetric"] = {{"D_sym", s.D_sym},
                        {"D0", s.D0},
                        {"ratio", s.D_sym / s.D0},
                        {"phase", s.phase},
                        {"lambda_re", s.lambda_star.real()},
                        {"lambda_im", s.lambda_star.imag()},
                        {"eta", s.eta}};
  }
  emit_json(c, doc);
}

// ---------------------------------------------------------------- gamma

struct GammaArgs {
  double h = 1.0, omega0 = 2.0, eps_min = 1e-4, eps_max = 1e-1, band = 1.0;
  int per_decade = 4;
  std::string method = "sweep";
  std::string json_out;
};

void run_gamma(const Common& c, const GammaArgs& a) {
  require_band(a.band);
  ProblemParams p{a.h / a.band, a.omega0 / a.band, a.eps_max, c.nodes};
  p.validate();
  const SpectralOperator S = spectral_operator(p.h, p.n_nodes, c.cache_dir);
  const auto eps = log_grid(a.eps_min, a.eps_max, a.per_decade);
  json config = {{"h", a.h},         {"omega0", a.omega0},   {"eps_min", a.eps_min}, {"eps_max", a.eps_max},
                 {"per_decade", a.per_decade}, {"method", a.method}, {"nodes", c.nodes},   {"band", a.band}};
  const json meta = metadata("gamma", config);

  json est;
  std::vector<SweepPoint> points;
  if (a.method == "sweep" || a.method == "symmetric") {
    const SweepGamma sg = gamma_from_sweep(S, p.omega0, eps);
    points = sg.points;
    est = estimate_json(sg.from_D);
    est["gamma_from_L2"] = num(sg.from_L2.gamma);
    est["nonlinear"] = sg.nonlinear;
    if (a.method == "symmetric") {
      const GammaEstimate sym = gamma_symmetric_sweep(S, p.omega0, eps);
      est["gamma_symmetric"] = num(sym.gamma);
      est["r2_symmetric"] = num(sym.r2);
    }
  } else if (a.method == "eigen") {
    const EigenGamma eg = gamma_from_eigen(S, p.omega0);
    est = {{"gamma", eg.gamma},           {"method", to_string(GammaMethod::eigen_ratio)},
           {"alpha", eg.fit.alpha},       {"beta", eg.fit.beta},
           {"alpha_r2", eg.fit.alpha_r2}, {"beta_r2", eg.fit.beta_r2},
           {"n_used", eg.fit.n_used}};
  } else {
    throw UsageError("unknown --method '" + a.method + "' (sweep, symmetric, eigen)");
  }

  Sink sink(c.out);
  auto& os = precise(sink.stream());
  write_csv_header(os, meta);
  if (a.json_out.empty()) os << "# estimate: " << est.dump() << '\n';
  os << "eps,D,eta,norm_L2\n";
  for (const auto& pt : points) os << pt.eps << ',' << pt.D << ',' << pt.eta << ',' << pt.norm_L2 << '\n';
  if (!a.json_out.empty()) {
    Common jc = c;
    jc.out = a.json_out;
    emit_json(jc, {{"metadata", meta}, {"estimate", est}});
  }
}

// ---------------------------------------------------------------- gamma-map

struct GammaMapArgs {
  std::string h = "0.5,1,2";
  std::string omega0 = "1.1..6";
  int points = 12;
  double eps_min = 1e-4, eps_max = 1e-1;
  int per_decade = 4;
};

struct MapRow {
  double h = 0, omega0 = 0, gamma = kNaN, r2 = kNaN, eps_hi = kNaN, gamma_eigen = kNaN;
  double gamma1_printed = kNaN, gamma1_factor2 = kNaN, gamma0 = kNaN, gamma1_lower = kNaN;
  std::string status = "ok";
};

void run_gamma_map(const Common& c, const GammaMapArgs& a) {
  const auto hs = parse_list(a.h);
  const auto ws = parse_range(a.omega0, a.points);
  for (double h : hs) ProblemParams{h, 2.0, a.eps_max, c.nodes}.validate();
  for (double w : ws) ProblemParams{1.0, w, a.eps_max, c.nodes}.validate();
  const auto eps = log_grid(a.eps_min, a.eps_max, a.per_decade);
  const unsigned nt = worker_count(c.threads);

  // One operator and one annulus per h, then every (h, omega0) pair independently.
  const auto ops = parallel_map<SpectralOperator>(hs.size(), nt, [&](std::size_t i) {
    return spectral_operator(hs[i], c.nodes, c.cache_dir);
  });
  const auto annuli = parallel_map<AnnulusData>(hs.size(), nt, [&](std::size_t i) { return riemann_invariant(hs[i]); });
  const auto rows = parallel_map<MapRow>(hs.size() * ws.size(), nt, [&](std::size_t k) {
    const std::size_t i = k / ws.size(), j = k % ws.size();
    MapRow r;
    r.h = hs[i];
    r.omega0 = ws[j];
    // Far from the band the largest eps can leave the active range; drop them from the top.
    std::vector<double> e = eps;
    while (true) {
      try {
        const SweepGamma sg = gamma_from_sweep(ops[i], r.omega0, e);
        r.gamma = sg.from_D.gamma;
        r.r2 = sg.from_D.r2;
        r.eps_hi = e.back();
        break;
      } catch (const RangeError&) {
        e.pop_back();
        if (e.size() < 6 || e.back() < 100.0 * e.front()) {
          r.status = "sweep_failed";
          break;
        }
      }
    }
    try {
      r.gamma_eigen = gamma_from_eigen(ops[i], r.omega0).gamma;
    } catch (const Error&) {
      if (r.status == "ok") r.status = "eigen_failed";
    }
    const Gamma1Annulus g1 = gamma1_annulus(r.omega0, annuli[i]);
    r.gamma1_printed = g1.printed;
    r.gamma1_factor2 = g1.factor2;
    const AppendixBounds ab = appendix_bounds(r.omega0, r.h);
    r.gamma0 = ab.gamma0;
    r.gamma1_lower = ab.gamma1_lower_route;
    return r;
  });

  json config = {{"h", hs},           {"omega0", ws},           {"eps_min", a.eps_min}, {"eps_max", a.eps_max},
                 {"per_decade", a.per_decade}, {"nodes", c.nodes}, {"threads", nt}};
  Sink sink(c.out);
  auto& os = precise(sink.stream());
  write_csv_header(os, metadata("gamma-map", config));
  os << "h,omega0,gamma,r2,eps_hi,gamma_eigen,gamma1_printed,gamma1_factor2,gamma0,gamma1_lower,status\n";
  for (const auto& r : rows)
    os << r.h << ',' << r.omega0 << ',' << r.gamma << ',' << r.r2 << ',' << r.eps_hi << ',' << r.gamma_eigen << ',' << r.gamma1_printed
       << ',' << r.gamma1_factor2 << ',' << r.gamma0 << ',' << r.gamma1_lower << ',' << r.status << '\n';
}

// ---------------------------------------------------------------- eig

struct EigArgs {
  double h = 1.0;
  double floor = kEigenFloor;
  bool with_rho = false;
};

void run_eig(const Common& c, const EigArgs& a) {
  ProblemParams{a.h, 2.0, 0.5, c.nodes}.validate();
  const SpectralOperator S = spectral_operator(a.h, c.nodes, c.cache_dir);
  const DecayRate fit = decay_rate(S.eig, a.floor);
  json config = {{"h", a.h}, {"nodes", c.nodes}, {"floor", a.floor}, {"with_rho", a.with_rho}};
  json meta = metadata("eig", config);
  meta["fit"] = {{"alpha", fit.alpha}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"n_used", fit.n_used}};
  double log_rho = 0.0;
  if (a.with_rho) {
    log_rho = riemann_invariant(a.h).log_rho;
    meta["log_rho"] = log_rho;
  }
  Sink sink(c.out);
  auto& os = precise(sink.stream());
  write_csv_header(os, meta);
  os << "n,lambda_n,log10_lambda_n" << (a.with_rho ? ",log10_rho_pow" : "") << '\n';
  const auto& lam = S.eig.values;
  for (Eigen::Index n = 0; n < lam.size(); ++n) {
    const double l = lam(n);
    os << n + 1 << ',' << l << ',' << (l > 0.0 ? std::log10(l) : kNaN);
    // rho^{-n} anchored at the first eigenvalue.
    if (a.with_rho) os << ',' << std::log10(lam(0)) - static_cast<double>(n) * log_rho / std::log(10.0);
    os << '\n';
  }
}

// ---------------------------------------------------------------- map

struct MapArgs {
  double h = 1.0;
  int terms = 256;
  std::string re = "-3..3";
  std::string im = "-1..3";
  int points = 61;
  std::string json_out;
};

void run_map(const Common& c, const MapArgs& a) {
  if (!(a.h > 0.0)) throw RangeError("map: h must be positive");
  const AnnulusData d = riemann_invariant(a.h, a.terms);
  json config = {{"h", a.h}, {"terms", a.terms}, {"re", a.re}, {"im", a.im}, {"points", a.points}};
  const json meta = metadata("map", config);
  const json invariant = {{"rho", d.rho},
                          {"log_rho", d.log_rho},
                          {"capacity", d.capacity},
                          {"refinement_change", d.refinement_change},
                          {"symmetry_defect", d.symmetry_defect}};
  if (!a.json_out.empty()) {
    Common jc = c;
    jc.out = a.json_out;
    emit_json(jc, {{"metadata", meta}, {"invariant", invariant}});
  }
  if (c.out.empty() && !a.json_out.empty()) return;
  const auto xs = parse_range(a.re, a.points);
  const auto ys = parse_range(a.im, a.points);
  Sink sink(c.out);
  auto& os = precise(sink.stream());
  write_csv_header(os, meta);
  os << "# invariant: " << invariant.dump() << '\n';
  os << "re_z,im_z,abs_psi\n";
  for (double y : ys)
    for (double x : xs) {
      double v = kNaN;
      try {
        v = abs_psi({x, y}, d);
      } catch (const DomainError&) {
        // on a slit: left as nan
      }
      os << x << ',' << y << ',' << v << '\n';
    }
}

// ---------------------------------------------------------------- bounds

struct BoundsArgs {
  std::string h = "1";
  std::string omega0 = "2";
};

void run_bounds(const Common& c, const BoundsArgs& a) {
  const auto hs = parse_list(a.h);
  const auto ws = parse_list(a.omega0);
  json rows = json::array();
  for (double h : hs)
    for (double w : ws) {
      const AppendixBounds b = appendix_bounds(w, h);
      rows.push_back({{"h", b.h},
                      {"omega0", b.omega0},
                      {"alpha0", b.alpha0},
                      {"alpha_omega0", b.alpha_omega0},
                      {"beta0", b.beta0},
                      {"z0_im", b.z0.imag()},
                      {"rho_disc", b.rho_disc},
                      {"m_abs", b.m_abs},
                      {"gamma0", b.gamma0},
                      {"gamma1_lower_route", b.gamma1_lower_route},
                      {"ordered", b.ordered}});
    }
  emit_json(c, {{"metadata", metadata("bounds", {{"h", hs}, {"omega0", ws}})}, {"bounds", rows}});
}

// ---------------------------------------------------------------- fit / certify

struct FitArgs {
  std::string data;
  double h = 0.5, band = 1.0, tol = 1e-8;
  int max_nodes = 40, max_iter = 200, band_points = 200;
  std::string certificate_out;
};

void run_fit(const Common& c, const FitArgs& a) {
  require_band(a.band);
  if (!(a.h > 0.0)) throw RangeError("fit: h must be positive");
  const ExperimentalData data = read_data(a.data, a.band);
  FitOptions opts;
  opts.max_nodes = a.max_nodes;
  opts.max_iterations = a.max_iter;
  opts.rel_tol = a.tol;
  opts.band_points = a.band_points;
  const FitResult r = fit_stieltjes(data, a.h / a.band, opts);

  json config = {{"data", a.data},           {"h", a.h},           {"band", a.band},
                 {"tol", a.tol},             {"max_nodes", a.max_nodes}, {"max_iter", a.max_iter},
                 {"band_points", a.band_points}, {"n_samples", data.grid.size()}, {"has_rule", data.has_rule()}};
  const json meta = metadata("fit", config);
  const json cert = certificate_json(r.certificate);
  json doc = {{"metadata", meta},
              {"model", model_json(r.model)},
              {"residual", r.residual},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"history", r.history}};
  if (a.certificate_out.empty()) {
    doc["certificate"] = cert;
  } else {
    Common cc = c;
    cc.out = a.certificate_out;
    emit_json(cc, {{"metadata", meta}, {"certificate", cert}});
  }
  emit_json(c, doc);
  if (!r.certificate.ok) throw CertificationFailed("fit: Caprini certificate failed (min C = " +
                                                   std::to_string(r.certificate.min_C) + ")");
}

struct CertifyArgs {
  std::string model;
  std::string data;
  double band = 1.0, tol = 1e-8;
  int t_points = 400;
};

void run_certify(const Common& c, const CertifyArgs& a) {
  require_band(a.band);
  std::ifstream in(a.model);
  if (!in) throw UsageError("cannot open model file " + a.model);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  // Accept either a bare model record or the document written by `fit`.
  const json parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded() && parsed.contains("model")) text = parsed["model"].dump();
  const StieltjesRational model = stieltjes_from_json(text);
  ExperimentalData data = read_data(a.data, a.band);
  if (!data.has_rule()) data = resample_to_band_rule(data, static_cast<int>(std::max<std::size_t>(data.grid.size(), 32)));
  const CapriniCertificate cert = certify(model, data, default_t_grid(model, a.t_points), a.tol);
  json config = {{"model", a.model}, {"data", a.data}, {"band", a.band}, {"tol", a.tol}, {"t_points", a.t_points}};
  emit_json(c, {{"metadata", metadata("certify", config)},
                {"residual", squared_residual(model, data)},
                {"certificate", certificate_json(cert)}});
  if (!cert.ok) throw CertificationFailed("certify: Caprini certificate failed");
}

// ---------------------------------------------------------------- demo-illposed

struct DemoArgs {
  double h = 0.3, omega0 = 2.0, eps = 1e-3;
  double x_min = -4.0, x_max = 4.0, im = 0.0;
  int points = 401;
};

void run_demo(const Common& c, const DemoArgs& a) {
  ProblemParams p{a.h, a.omega0, a.eps, c.nodes};
  p.validate();
  if (a.points < 2) throw UsageError("--points must be at least 2");
  if (!(a.im > -a.h)) throw RangeError("demo-illposed: --im must exceed -h");
  const SpectralOperator S = spectral_operator(p.h, p.n_nodes, c.cache_dir);
  const MaximizerPair pr = worst_case_pair(S, p.omega0, p.eps);
  json config = {{"h", a.h},         {"omega0", a.omega0}, {"eps", a.eps},     {"nodes", c.nodes},
                 {"x_min", a.x_min}, {"x_max", a.x_max},   {"im", a.im},       {"points", a.points}};
  json meta = metadata("demo-illposed", config);
  meta["pair"] = {{"scale", pr.scale},
                  {"band_mismatch", pr.band_mismatch},
                  {"separation_at_omega0", pr.separation_at_omega0},
                  {"D", pr.D},
                  {"eps_inner", pr.eps_inner},
                  {"amplitude", pr.amplitude},
                  {"atom_at_zero", pr.atom_at_zero}};
  Sink sink(c.out);
  auto& os = precise(sink.stream());
  write_csv_header(os, meta);
  os << "omega,re_f,im_f,re_g,im_g\n";
  for (int k = 0; k < a.points; ++k) {
    const double x = a.x_min + (a.x_max - a.x_min) * k / (a.points - 1);
    const cplx w(x, a.im);
    const cplx f = pr.F(w) / pr.scale, g = pr.G(w) / pr.scale;
    os << x << ',' << f.real() << ',' << f.imag() << ',' << g.real() << ',' << g.imag() << '\n';
  }
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string kind = "bound";
  std::string h = "1";
  std::string omega0 = "2";
  double eps_min = 1e-4, eps_max = 1e-1;
  int per_decade = 4;
  bool symmetric = true;
  double alpha = 4.0, beta = 1.75, t_min = 0.0, t_max = 8.0;
  int points = 401;
};

struct SweepRow {
  double h = 0, omega0 = 0, eps = 0, eta = kNaN, D = kNaN, D_sym = kNaN, kkt = kNaN, activity = kNaN;
  std::string status = "ok";
};

void run_sweep_bound(const Common& c, const SweepArgs& a) {
  const auto hs = parse_list(a.h);
  const auto ws = parse_list(a.omega0);
  const auto eps = log_grid(a.eps_min, a.eps_max, a.per_decade);
  for (double h : hs)
    for (double w : ws) ProblemParams{h, w, a.eps_max, c.nodes}.validate();
  const unsigned nt = worker_count(c.threads);
  const auto ops = parallel_map<SpectralOperator>(hs.size(), nt, [&](std::size_t i) {
    return spectral_operator(hs[i], c.nodes, c.cache_dir);
  });
  const std::size_t per_h = ws.size() * eps.size();
  const auto rows = parallel_map<SweepRow>(hs.size() * per_h, nt, [&](std::size_t k) {
    const std::size_t i = k / per_h, j = (k % per_h) / eps.size(), l = k % eps.size();
    SweepRow r;
    r.h = hs[i];
    r.omega0 = ws[j];
    r.eps = eps[l];
    try {
      const BoundResult b = bound_D0(ops[i], r.omega0, r.eps);
      r.eta = b.eta;
      r.D = b.D;
      r.kkt = b.kkt_residual;
      r.activity = b.activity_residual;
      if (!b.constraint_active) r.status = "inactive";
      if (a.symmetric) r.D_sym = bound_D_symmetric(ops[i], r.omega0, r.eps).D_sym;
    } catch (const RangeError&) {
      r.status = "range";
    }
    return r;
  });
  json config = {{"kind", a.kind},       {"h", hs},       {"omega0", ws},       {"eps_min", a.eps_min},
                 {"eps_max", a.eps_max}, {"per_decade", a.per_decade}, {"symmetric", a.symmetric},
                 {"nodes", c.nodes},     {"threads", nt}};
  Sink sink(c.out);
  auto& os = precise(sink.stream());
  write_csv_header(os, metadata("sweep", config));
  os << "h,omega0,eps,eta,D,D_sym,kkt_residual,activity_residual,status\n";
  for (const auto& r : rows)
    os << r.h << ',' << r.omega0 << ',' << r.eps << ',' << r.eta << ',' << r.D << ',' << r.D_sym << ',' << r.kkt
       << ',' << r.activity << ',' << r.status << '\n';
}

void run_sweep_L(const Common& c, const SweepArgs& a) {
  if (!(a.alpha > 0.0) || !(a.beta > 0.0) || !(2.0 * a.beta < a.alpha))
    throw RangeError("sweep: need 0 < 2 beta < alpha");
  if (a.points < 2) throw UsageError("--points must be at least 2");
  json config = {{"kind", a.kind}, {"alpha", a.alpha}, {"beta", a.beta}, {"t_min", a.t_min}, {"t_max", a.t_max},
                 {"points", a.points}};
  json meta = metadata("sweep", config);
  meta["identity"] = {{"period_mean", gamma_integral_identity(a.alpha, a.beta)},
                      {"two_beta_over_alpha", 2.0 * a.beta / a.alpha}};
  Sink sink(c.out);
  auto& os = precise(sink.stream());
  write_csv_header(os, meta);
  os << "t,L,ratio\n";
  for (int k = 0; k < a.points; ++k) {
    const double t = a.t_min + (a.t_max - a.t_min) * k / (a.points - 1);
    const double L = L_function(t, a.alpha, a.beta);
    os << t << ',' << L << ',' << L / (1.0 + L) << '\n';
  }
}

void run_sweep(const Common& c, const SweepArgs& a) {
  if (a.kind == "bound") return run_sweep_bound(c, a);
  if (a.kind == "L") return run_sweep_L(c, a);
  throw UsageError("unknown --kind '" + a.kind + "' (bound, L)");
}

void add_common(CLI::App* sub, Common& c, bool with_nodes = true) {
  sub->add_option("-o,--out", c.out, "Output file (stdout when omitted)");
  if (with_nodes) {
    sub->add_option("--nodes", c.nodes, "Gauss-Legendre nodes on the band")->check(CLI::Range(8, 2000));
    sub->add_option("--cache-dir", c.cache_dir, "Operator cache directory (overrides PERMEXT_CACHE_DIR)");
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"permext: certified extrapolation bounds and Stieltjes fitting"};
  // "-h" would collide with the --h option of most subcommands.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(PERMEXT_VERSION_STRING));
  Common common;

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Optimal bound D(eps) at omega0");
  add_common(bound, common);
  bound->add_option("--h", ba.h, "Distance of the analyticity boundary below the real axis")->capture_default_str();
  bound->add_option("--omega0", ba.omega0, "Extrapolation frequency")->capture_default_str();
  bound->add_option("--eps", ba.eps, "Band accuracy")->capture_default_str();
  bound->add_option("--band", ba.band, "Band half-width B; h and omega0 are divided by B")->capture_default_str();
  bound->add_flag("--symmetric", ba.symmetric, "Also compute the symmetric bound");
  bound->add_option("--phases", ba.phases, "Phase scan size for --symmetric")->capture_default_str();
  bound->callback([&] { run_bound(common, ba); });

  GammaArgs ga;
  auto* gamma = app.add_subcommand("gamma", "Power-law exponent at one (h, omega0)");
  add_common(gamma, common);
  gamma->add_option("--h", ga.h, "Distance of the analyticity boundary below the real axis")->capture_default_str();
  gamma->add_option("--omega0", ga.omega0, "Extrapolation frequency")->capture_default_str();
  gamma->add_option("--eps-min", ga.eps_min, "Smallest eps of the sweep")->capture_default_str();
  gamma->add_option("--eps-max", ga.eps_max, "Largest eps of the sweep")->capture_default_str();
  gamma->add_option("--per-decade", ga.per_decade, "Sweep points per decade of eps")->capture_default_str();
  gamma->add_option("--method", ga.method, "sweep, symmetric or eigen")->capture_default_str();
  gamma->add_option("--band", ga.band, "Band half-width B; h and omega0 are divided by B")->capture_default_str();
  gamma->add_option("--json", ga.json_out, "Write the estimate to this JSON file");
  gamma->callback([&] { run_gamma(common, ga); });

  GammaMapArgs gm;
  auto* gmap = app.add_subcommand("gamma-map", "Exponent over a grid of omega0 for several h");
  add_common(gmap, common);
  gmap->add_option("--h", gm.h, "Comma-separated list")->capture_default_str();
  gmap->add_option("--omega0", gm.omega0, "List or lo..hi range")->capture_default_str();
  gmap->add_option("--points", gm.points, "Points in an omega0 range")->capture_default_str();
  gmap->add_option("--eps-min", gm.eps_min, "Smallest eps of the sweep")->capture_default_str();
  gmap->add_option("--eps-max", gm.eps_max, "Largest eps of the sweep")->capture_default_str();
  gmap->add_option("--per-decade", gm.per_decade, "Sweep points per decade of eps")->capture_default_str();
  gmap->add_option("--threads", common.threads, "Worker threads (0 = hardware)");
  gmap->callback([&] { run_gamma_map(common, gm); });

  EigArgs ea;
  auto* eig = app.add_subcommand("eig", "Eigenvalues of the band operator");
  add_common(eig, common);
  eig->add_option("--h", ea.h, "Distance of the analyticity boundary below the real axis")->capture_default_str();
  eig->add_option("--floor", ea.floor, "Fit floor for the decay rate")->capture_default_str();
  eig->add_flag("--with-rho", ea.with_rho, "Add the rho^{-n} reference column");
  eig->callback([&] { run_eig(common, ea); });

  MapArgs ma;
  auto* map = app.add_subcommand("map", "Riemann invariant and |Psi| on a grid");
  add_common(map, common, false);
  map->add_option("--h", ma.h, "Distance of the analyticity boundary below the real axis")->capture_default_str();
  map->add_option("--terms", ma.terms, "Chebyshev terms")->capture_default_str();
  map->add_option("--re", ma.re, "Re z values (list or lo..hi)")->capture_default_str();
  map->add_option("--im", ma.im, "Im z values (list or lo..hi)")->capture_default_str();
  map->add_option("--points", ma.points, "Points per range")->capture_default_str();
  map->add_option("--json", ma.json_out, "Write {rho, capacity} to this JSON file");
  map->callback([&] { run_map(common, ma); });

  BoundsArgs bb;
  auto* bounds = app.add_subcommand("bounds", "Elementary lower and upper exponent bounds");
  add_common(bounds, common, false);
  bounds->add_option("--h", bb.h, "Comma-separated list")->capture_default_str();
  bounds->add_option("--omega0", bb.omega0, "Comma-separated list")->capture_default_str();
  bounds->callback([&] { run_bounds(common, bb); });

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Positivity-constrained Stieltjes fit with certificate");
  add_common(fit, common, false);
  fit->add_option("--data", fa.data, "CSV with columns omega, re_f, im_f")->required()->check(CLI::ExistingFile);
  fit->add_option("--h", fa.h, "Damping offset in data units")->capture_default_str();
  fit->add_option("--band", fa.band, "Band end B; omega and h are divided by B")->capture_default_str();
  fit->add_option("--tol", fa.tol, "Relative certificate tolerance")->capture_default_str();
  fit->add_option("--max-nodes", fa.max_nodes, "Largest number of Stieltjes nodes")->capture_default_str();
  fit->add_option("--max-iter", fa.max_iter, "Exchange iterations")->capture_default_str();
  fit->add_option("--band-points", fa.band_points, "Resampling size for off-rule data")->capture_default_str();
  fit->add_option("--certificate", fa.certificate_out, "Write the certificate to this JSON file");
  fit->callback([&] { run_fit(common, fa); });

  CertifyArgs ca;
  auto* cert = app.add_subcommand("certify", "Check the Caprini certificate of a model");
  add_common(cert, common, false);
  cert->add_option("--model", ca.model, "Model JSON")->required()->check(CLI::ExistingFile);
  cert->add_option("--data", ca.data, "CSV with columns omega, re_f, im_f")->required()->check(CLI::ExistingFile);
  cert->add_option("--band", ca.band, "Band half-width B; h and omega0 are divided by B")->capture_default_str();
  cert->add_option("--tol", ca.tol, "Relative certificate tolerance")->capture_default_str();
  cert->add_option("--t-points", ca.t_points, "Points of the t grid for C(t)")->capture_default_str();
  cert->callback([&] { run_certify(common, ca); });

  DemoArgs da;
  auto* demo = app.add_subcommand("demo-illposed", "Two admissible functions that agree on the band");
  add_common(demo, common);
  demo->add_option("--h", da.h, "Distance of the analyticity boundary below the real axis")->capture_default_str();
  demo->add_option("--omega0", da.omega0, "Extrapolation frequency")->capture_default_str();
  demo->add_option("--eps", da.eps, "Band accuracy")->capture_default_str();
  demo->add_option("--x-min", da.x_min, "Left end of the sampling line")->capture_default_str();
  demo->add_option("--x-max", da.x_max, "Right end of the sampling line")->capture_default_str();
  demo->add_option("--im", da.im, "Im omega of the sampling line")->capture_default_str();
  demo->add_option("--points", da.points, "Samples on the line")->capture_default_str();
  demo->callback([&] { run_demo(common, da); });

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Grid sweeps of the bound or of L(t)");
  add_common(sweep, common);
  sweep->add_option("--kind", sa.kind, "bound or L")->capture_default_str();
  sweep->add_option("--h", sa.h, "Comma-separated list")->capture_default_str();
  sweep->add_option("--omega0", sa.omega0, "Comma-separated list")->capture_default_str();
  sweep->add_option("--eps-min", sa.eps_min, "Smallest eps of the sweep")->capture_default_str();
  sweep->add_option("--eps-max", sa.eps_max, "Largest eps of the sweep")->capture_default_str();
  sweep->add_option("--per-decade", sa.per_decade, "Sweep points per decade of eps")->capture_default_str();
  sweep->add_option("--symmetric", sa.symmetric, "Include D_sym")->capture_default_str();
  sweep->add_option("--alpha", sa.alpha, "Period alpha of L")->capture_default_str();
  sweep->add_option("--beta", sa.beta, "Shift beta of L")->capture_default_str();
  sweep->add_option("--t-min", sa.t_min, "First t")->capture_default_str();
  sweep->add_option("--t-max", sa.t_max, "Last t")->capture_default_str();
  sweep->add_option("--points", sa.points, "Points of the t grid (kind L)")->capture_default_str();
  sweep->add_option("--threads", common.threads, "Worker threads (0 = hardware)");
  sweep->callback([&] { run_sweep(common, sa); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "permext: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CertificationFailed& e) {
    std::cerr << "permext: " << e.what() << '\n';
    return kExitCertification;
  } catch (const RangeError& e) {
    std::cerr << "permext: numeric range error: " << e.what() << '\n';
    return kExitRange;
  } catch (const DomainError& e) {
    std::cerr << "permext: domain error: " << e.what() << '\n';
    return kExitRange;
  } catch (const std::exception& e) {
    std::cerr << "permext: error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

}  // namespace permext::cli

int main(int argc, char** argv) { return permext::cli::run(argc, argv); }
