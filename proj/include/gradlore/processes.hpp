#pragma once

#include "gradlore/gi_batch.hpp"
#include "gradlore/numerics/matrix.hpp"
#include "gradlore/numerics/rng.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace gradlore {

/// Process outputs at one input together with d(outputs)/d(input).
struct Evaluation {
  std::vector<double> values;
  Matrix jacobian;  ///< values.size() x input size
};

// --- 1-D toy processes ------------------------------------------------------

/// z = 2x^2 + eps, eps ~ N(0, noise^2); x ~ U[lo, hi]; GI is the noiseless 4x.
struct QuadraticSpec {
  double lo = -3.0;
  double hi = 3.0;
  double noise = 1.0;
};

/// z = sin x on [0, 2 pi]; GI = cos x.
struct SineSpec {
  double lo = 0.0;
  double hi = 6.283185307179586;
};

GiBatch gen_quadratic(std::size_t n, Rng& rng, const QuadraticSpec& spec = {});
GiBatch gen_sine(std::size_t n, Rng& rng, const SineSpec& spec = {});

// --- 2-D cosine simulator -----------------------------------------------------

/// y_t = (cos[phi(theta1 - t - psi)] cos[phi(theta2 - t - psi)])^2 over t in `times`.
struct Cosine2dSpec {
  double phi = 0.1;
  double psi = 5.0;
  std::vector<double> times{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double theta_lo = 0.0;
  double theta_hi = 15.0;
};

Evaluation gen_cosine2d(std::span<const double> theta, const Cosine2dSpec& spec = {});

// --- GARCH(1,1) multi-horizon forecasts ----------------------------------------

struct GarchParams {
  double u = 0.0;       ///< period-t return
  double omega = 0.0;   ///< constant, >= 0
  double alpha = 0.0;   ///< ARCH weight, >= 0
  double beta = 0.0;    ///< GARCH weight, >= 0
  double sigma2 = 0.0;  ///< current variance, > 0
  std::vector<int> horizons{1, 2, 3, 4, 5};
};

/// sigma^2_{t+h} for every requested horizon; Jacobian columns are
/// d/d(u, omega, alpha, beta). Throws BadParams on invalid parameters.
Evaluation gen_garch(const GarchParams& p);

/// Surrogate view: input (u, omega, alpha, beta) with sigma2 and horizons fixed.
struct GarchSpec {
  double sigma2 = 0.01;
  std::vector<int> horizons{1, 2, 3, 4, 5};
  double u_max = 0.1;
  double omega_max = 0.1;
  double alpha_max = 0.5;
  double beta_max = 0.95;
};

// --- 8-D exponential process ------------------------------------------------------

/// y = b1 x0 + b2 b3 exp[b4 (x1 - alpha)] + b5 b6 exp[b7 (x2 - eta)] + b8 on a
/// fixed design of inputs X in [0, 1]^3.
struct Exp8dSpec {
  double alpha_fix = 0.5;
  double eta_fix = 0.5;
  Matrix design;  ///< m x 3
  double beta_lo = -1.0;
  double beta_hi = 1.0;

  /// Design of `rows` points drawn from U[0,1]^3.
  static Exp8dSpec with_random_design(std::size_t rows, Rng& rng);
};

/// One output per design row; Jacobian is rows x 8 (d y / d beta_j).
Evaluation gen_exp8d(std::span<const double> beta, const Matrix& design, const Exp8dSpec& spec);

// --- Uniform surrogate interface ------------------------------------------------

enum class ProcessKind { quadratic, cosine2d, garch, exp8d, sine };

std::string_view to_string(ProcessKind kind);
ProcessKind parse_process_kind(std::string_view name);

/// A process as seen by a surrogate network: an input vector mapped to an
/// output vector with its analytic Jacobian.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::cosine2d;
  QuadraticSpec quadratic;
  SineSpec sine;
  Cosine2dSpec cosine2d;
  GarchSpec garch;
  Exp8dSpec exp8d;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  /// Noiseless outputs and Jacobian.
  Evaluation evaluate(std::span<const double> input) const;
  /// One input drawn from the process's sampling region.
  std::vector<double> sample_input(Rng& rng) const;
  /// Per-dimension (lower, upper) bounds of the sampling region.
  std::vector<std::pair<double, double>> input_box() const;
};

/// n samples; quadratic targets receive their noise, GI is always noiseless.
GiBatch generate(const ProcessSpec& spec, std::size_t n, Rng& rng);

/// x' = (x - center) / scale; gradients rescale by the chain rule.
GiBatch rescale_inputs(const GiBatch& batch, std::span<const double> center,
                       std::span<const double> scale);

// --- Dataset CSV ---------------------------------------------------------------------

/// Header x0..,z0..,g<out>_<in>..; values in shortest round-trip form.
void write_dataset_csv(std::ostream& os, const GiBatch& batch);
GiBatch read_dataset_csv(std::istream& is);

}  // namespace gradlore
