#pragma once

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace permext {

using cplx = std::complex<double>;
using Evaluator = std::function<cplx(cplx)>;

inline constexpr double kPi = 3.14159265358979323846;

/// f(w) = rho* + sum_j sigma_j / (t_j - (w + i h)^2) with a finitely supported
/// spectral measure. Immutable once constructed.
class StieltjesRational {
 public:
  StieltjesRational() = default;
  StieltjesRational(double rho_star, double h, std::vector<double> nodes,
                    std::vector<double> masses);

  double rho_star() const { return rho_star_; }
  double h() const { return h_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return nodes_.size(); }

  cplx operator()(cplx omega) const;

 private:
  double rho_star_ = 0.0;
  double h_ = 1.0;
  std::vector<double> nodes_;
  std::vector<double> masses_;
};

/// Samples of a complex function on a list of complex abscissae.
struct GridFunction {
  std::vector<cplx> grid;
  std::vector<cplx> values;
  std::map<std::string, std::string> metadata;

  GridFunction() = default;
  GridFunction(std::vector<cplx> g, std::vector<cplx> v);
  static GridFunction sample(const Evaluator& f, std::vector<cplx> g);
  void validate() const;
};

struct ProblemParams {
  double h = 1.0;
  double omega0 = 2.0;
  double eps = 1e-3;
  int n_nodes = 200;

  void validate() const;
};

cplx eval_stieltjes(const StieltjesRational& f, cplx omega);

/// sum_j sigma_j / (t_j + 1)
double dual_norm(const StieltjesRational& f);

/// (Sg)(w) = conj(g(-conj(w))); the grid must be closed under w -> -conj(w).
GridFunction apply_S(const GridFunction& g);
double symmetry_defect(const GridFunction& g);

/// Symmetric grid {+-x + i y} built from nonnegative abscissae.
std::vector<cplx> symmetric_grid(const std::vector<double>& re, const std::vector<double>& im);

struct PositivityScan {
  double min_im = 0.0;
  bool ok = false;
};

PositivityScan positivity_scan(const Evaluator& f, double h, double h_prime,
                               const std::vector<double>& x_grid);

/// Density of the spectral measure, (1/pi) Im f(sqrt(lambda) - i h), for a
/// symmetric f with boundary values on Im w = -h.
std::vector<double> measure_density_from_boundary(const Evaluator& f, double h,
                                                  const std::vector<double>& lambda_grid,
                                                  double sym_tol = 1e-8);

struct LineNorm {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// (int_R |f(x - i h') / (x - i h' + i h)|^2 dx)^(1/2) over the whole line: panels
/// around the peak hints plus tails mapped onto (0, 1], so nothing is truncated.
LineNorm hprime_norm(const Evaluator& f, double h, double h_prime,
                     const std::vector<double>& peak_hints = {});
LineNorm hprime_norm(const StieltjesRational& f, double h_prime);

/// L2 norm over [a, b] using the quadrature weights attached to the real grid.
double band_norm(const GridFunction& g, double a, double b, const std::vector<double>& weights);

struct MeanRealBound {
  double norm_sum = 0.0;   // rho* + ||sigma||_*
  double mean_real = 0.0;  // int_0^1 Re f
  double mu_h = 0.0;       // inf of the weight phi
  double lower = 0.0;      // mu_h * norm_sum
  double c_h = 0.0;        // lower constant: norm_sum >= c_h ||f||_{L2(0,1)}
  double l2_norm = 0.0;    // ||f||_{L2(0,1)}
};

/// phi(x) = (x^2+1)/(4x) ln(1 + 4x/((x-1)^2 + h^2)), with its limits at 0 and infinity.
double mean_weight(double x, double h);
double mean_weight_infimum(double h);
MeanRealBound mean_real_lower_bound(const StieltjesRational& f);

}  // namespace permext
