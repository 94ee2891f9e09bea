#pragma once

#include "gradlore/numerics/matrix.hpp"
#include "gradlore/numerics/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace gradlore {

/// Gaussian RBF features exp{-(x - c_i)^2 / r^2} plus a leading ones column.
struct RbfBasis {
  std::vector<double> centres;
  double width = 1.0;

  /// `count` centres evenly spaced over [lo, hi], endpoints included.
  static RbfBasis evenly_spaced(std::size_t count, double lo, double hi, double width);
  std::size_t columns() const { return centres.size() + 1; }
  /// Throws BadWidth for width <= 0, BadParams unless centres strictly increase.
  void validate() const;
};

/// N x (C+1): ones, then one RBF per centre.
Matrix rbf_design(std::span<const double> x, const RbfBasis& basis);
/// N x (C+1): d/dx of each RBF column. Column 0 is ones when `intercept`
/// (the derivative model keeps its own constant term), zeros otherwise.
Matrix rbf_deriv_design(std::span<const double> x, const RbfBasis& basis, bool intercept = true);

/// (Phi^T Phi + lambda I)^{-1} Phi^T z. Throws NotSpd when singular.
std::vector<double> fit_ridge(const Matrix& phi, std::span<const double> z, double lambda);
/// Ridge fit of derivative features to observed gradients.
std::vector<double> fit_beta_grad(const Matrix& dphi, std::span<const double> g, double lambda);
/// (Phi^T Phi + (l1 + l2) I)^{-1} (l2 beta_grad + Phi^T z).
std::vector<double> fit_ridge_gradients(const Matrix& phi, std::span<const double> z,
                                        std::span<const double> beta_grad, double lambda1,
                                        double lambda2);

/// |z - Phi b|^2 + l1 |b|^2 + l2 |b - beta_grad|^2
double rg_objective(const Matrix& phi, std::span<const double> z, std::span<const double> beta,
                    std::span<const double> beta_grad, double lambda1, double lambda2);

/// Noisy sine observations: z = sin x + noise, g = cos x + noise, x ~ U[lo, hi].
struct SineSample {
  std::vector<double> x, z, g;
};

struct SineSetup {
  double lo = 0.0;
  double hi = 6.283185307179586;
  double noise = 0.43;
  std::size_t centres = 7;
  double width = 1.0;
  bool deriv_intercept = true;
  std::size_t test_points = 200;

  RbfBasis basis() const;
  SineSample draw(std::size_t n, Rng& rng) const;
  /// Noiseless evenly spaced grid over [lo, hi].
  SineSample test_grid() const;
};

struct Fig4Config {
  SineSetup setup;
  std::size_t train_size = 12;
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  /// Penalty of the beta_grad fit.
  double lambda_grad = 0.1;
  std::size_t draws = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Fig4Draw {
  double rmse_ridge = 0.0;
  double rmse_rg = 0.0;
  double grad_rmse_ridge = 0.0;  ///< derivative of the ridge model vs cos x
  double grad_rmse_grad = 0.0;   ///< beta_grad model vs cos x
};

struct Fig4Result {
  std::vector<Fig4Draw> draws;
  Fig4Draw mean;
  double test_std = 0.0;  ///< population std of the noiseless test outputs
};

Fig4Result run_fig4(const Fig4Config& cfg);

/// x,z_true,z_ridge,z_rg on the test grid for a single draw.
void write_fig4_predictions(std::ostream& os, const Fig4Config& cfg, std::uint64_t draw_index);

struct RgExperimentConfig {
  SineSetup setup;
  std::vector<std::size_t> sizes = default_sizes();
  std::size_t trials = 50;
  std::vector<double> lambda_grid = log_grid(1e-4, 1e1, 11);
  /// Grid for lambda2; defaults to lambda_grid when empty.
  std::vector<double> lambda2_grid;
  double validation_fraction = 0.3;
  std::uint64_t seed = 0;

  static std::vector<std::size_t> default_sizes();
  static std::vector<double> log_grid(double lo, double hi, std::size_t points);
  void validate() const;
};

struct RgTrial {
  std::size_t size = 0;
  std::size_t trial = 0;
  double rmse_ridge = 0.0;
  double rmse_rg = 0.0;
  /// 100 (ridge - rg) / ridge; positive when RG is better.
  double pct_diff = 0.0;
  double lambda_ridge = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda_grad = 0.0;
};

/// Per draw: tune on the validation share (first part of the draw), fit on the
/// rest, score on the noiseless test grid. Ties in tuning go to the earlier
/// grid entry.
std::vector<RgTrial> rg_experiment(const RgExperimentConfig& cfg, std::size_t jobs = 1);
double mean_pct_diff(const std::vector<RgTrial>& trials);

/// size,trial,rmse_ridge,rmse_rg,pct_diff
void write_rg_results_csv(std::ostream& os, const std::vector<RgTrial>& trials);

}  // namespace gradlore
