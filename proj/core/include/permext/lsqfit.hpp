#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "permext/stieltjes.hpp"

namespace permext {

/// Band data on the rescaled interval [0, 1]. When `weights` matches the grid it is
/// used as the band quadrature rule; otherwise the data are resampled.
struct ExperimentalData {
  std::vector<double> grid;
  std::vector<cplx> values;
  std::optional<double> noise_level;
  std::vector<double> weights;

  void validate() const;
  bool has_rule() const { return !weights.empty() && weights.size() == grid.size(); }
};

/// Gauss-Legendre rule on [0, 1] with n nodes, samples of f attached.
ExperimentalData band_samples(const Evaluator& f, int n);

/// Attaches Gauss-Legendre weights when the grid coincides with the n-point rule on
/// [0, 1] to 1e-12. Returns whether a rule was attached.
bool attach_gauss_rule(ExperimentalData& data);

/// Resamples onto an n-point Gauss-Legendre rule on [grid.front(), grid.back()] with
/// modified Akima interpolation of the real and imaginary parts.
ExperimentalData resample_to_band_rule(const ExperimentalData& data, int n);

/// Exact samples of `truth` plus complex Gaussian noise, E|noise|^2 = noise_sigma^2.
ExperimentalData synthesize_data(const StieltjesRational& truth, const std::vector<double>& grid, double noise_sigma,
                                 std::uint64_t seed, const std::vector<double>& weights = {});
ExperimentalData synthesize_band_data(const StieltjesRational& truth, int n, double noise_sigma, std::uint64_t seed);

/// ||f - f_exp||^2 over the band rule.
double squared_residual(const StieltjesRational& model, const ExperimentalData& data);

/// C(t) = 2 Re sum_k W_k (f(x_k) - f_exp(x_k)) / (t - (x_k - ih)^2).
double caprini_function(const StieltjesRational& model, const ExperimentalData& data, double t);
double caprini_derivative(const StieltjesRational& model, const ExperimentalData& data, double t);
/// lim_{t -> inf} t C(t) = 2 Re sum_k W_k (f(x_k) - f_exp(x_k)).
double caprini_tail_exact(const StieltjesRational& model, const ExperimentalData& data);

struct CapriniCertificate {
  std::vector<double> t_grid;
  std::vector<double> C_values;
  double min_C = 0.0;
  double argmin_t = 0.0;
  std::vector<double> node_values;       // |C(t_j)|
  std::vector<double> node_derivatives;  // |C'(t_j)| for t_j > 0
  double tail_limit = 0.0;               // Richardson estimate from the three largest grid points
  double tail_exact = 0.0;
  double tol = 0.0;
  bool ok = false;
};

/// Log-spaced grid on (0, t_max] with 0 prepended.
std::vector<double> default_t_grid(const StieltjesRational& model, int n = 400);

CapriniCertificate certify(const StieltjesRational& model, const ExperimentalData& data,
                           const std::vector<double>& t_grid, double rel_tol = 1e-8);
CapriniCertificate certify(const StieltjesRational& model, const ExperimentalData& data);

struct FitOptions {
  int max_iterations = 200;
  int max_nodes = 40;
  double t_max = 1e3;
  int n_t_grid = 400;
  double rel_tol = 1e-8;
  int band_points = 200;                // used when the data carry no rule
  std::vector<double> initial_nodes;
};

struct FitResult {
  StieltjesRational model;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> history;
  CapriniCertificate certificate;
  bool converged = false;
};

FitResult fit_stieltjes(const ExperimentalData& data, double h, const FitOptions& opts = {});

/// min ||A x - b|| subject to x >= 0 (Lawson-Hanson active set).
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0);

struct VariationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double delta_rho_term = 0.0;
  double measure_term = 0.0;
  double phi_norm2 = 0.0;
};

/// E(competitor) - E(model) against d_rho lim tC + sum nu_j C(t_j) + ||phi||^2.
VariationCheck variation_identity_check(const StieltjesRational& model, const StieltjesRational& competitor,
                                        const ExperimentalData& data);

}  // namespace permext
