#pragma once

#include "gradlore/gi_batch.hpp"
#include "gradlore/numerics/matrix.hpp"
#include "gradlore/numerics/rng.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace gradlore {

enum class OutputActivation { identity, sigmoid };

/// Fully connected network: tanh on every hidden layer, identity or sigmoid
/// on the output. All parameters live in one flat vector, layer by layer,
/// each layer as its row-major weight matrix (out x in) followed by its bias.
class Mlp {
 public:
  /// Zero-initialised network. Needs at least an input and an output size.
  explicit Mlp(std::vector<std::size_t> layer_sizes,
               OutputActivation output = OutputActivation::identity);

  /// Weights ~ N(0, 1/sqrt(fan_in)), biases zero.
  static Mlp random(std::vector<std::size_t> layer_sizes, OutputActivation output, Rng& rng);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  OutputActivation output_activation() const noexcept { return output_; }
  std::size_t input_dim() const noexcept { return sizes_.front(); }
  std::size_t output_dim() const noexcept { return sizes_.back(); }
  /// Number of weight layers.
  std::size_t depth() const noexcept { return sizes_.size() - 1; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> sizes_;
  OutputActivation output_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

/// Gradient with the same layout as Mlp::params().
using ParamGrad = std::vector<double>;

/// Post-activation values a_0 = x, ..., a_L = network output.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;
  std::span<const double> output() const { return activations.back(); }
};

/// Forward values plus the forward-mode input tangents of every layer, which
/// double backpropagation differentiates.
struct JacobianTrace {
  ForwardTrace forward;
  /// Stored transposed, one row per input coordinate j.
  /// tangents[l] row j = d a_l / d x_j (d_in x n_l) for l >= 1; tangents[0] unused (identity).
  std::vector<Matrix> tangents;
  /// pre_tangents[l] row j = d z_l / d x_j (d_in x n_{l+1}); layer 0 holds W_0^T.
  std::vector<Matrix> pre_tangents;
  Matrix jacobian;  ///< d_out x d_in
};

std::vector<double> forward(const Mlp& net, std::span<const double> x);
ForwardTrace trace_forward(const Mlp& net, std::span<const double> x);
/// Overwrites `out`, reusing its storage.
void trace_forward(const Mlp& net, std::span<const double> x, ForwardTrace& out);

/// Analytic d(output)/d(input) by a forward-mode sweep.
Matrix input_jacobian(const Mlp& net, std::span<const double> x);
JacobianTrace trace_jacobian(const Mlp& net, std::span<const double> x);
void trace_jacobian(const Mlp& net, std::span<const double> x, JacobianTrace& out);

/// Chains dL/d(output) through the output activation.
std::vector<double> output_logit_grad(const Mlp& net, const ForwardTrace& trace,
                                      std::span<const double> dloss_doutput);

/// Standard backpropagation from dL/d(output pre-activation). Adds into
/// `param_grad` and writes dL/dx into `input_grad`; either may be empty.
void backprop(const Mlp& net, const ForwardTrace& trace, std::span<const double> dloss_dlogits,
              std::span<double> param_grad, std::span<double> input_grad);

/// Double backpropagation: reverse sweep through trace_jacobian for a loss
/// depending on the output (`dloss_doutput`, may be empty) and on the input
/// Jacobian (`dloss_djac`, d_out x d_in). Adds into `param_grad` and writes
/// dL/dx into `input_grad`; either may be empty.
void jacobian_backprop(const Mlp& net, const JacobianTrace& trace,
                       std::span<const double> dloss_doutput, const Matrix& dloss_djac,
                       std::span<double> param_grad, std::span<double> input_grad);

/// E = (1/n) sum_i ||z_i - net(x_i)||^2
double target_loss(const Mlp& net, const GiBatch& batch);
/// E_grad = (1/n) sum_i ||dz_i/dx_i - J_net(x_i)||_F^2
double gi_loss(const Mlp& net, const GiBatch& batch);

ParamGrad param_grad_target(const Mlp& net, const GiBatch& batch);
ParamGrad param_grad_gi(const Mlp& net, const GiBatch& batch);

/// dE/dtheta into `g_target` and, when `g_gi` is non-empty, dE_grad/dtheta
/// into `g_gi`, sharing one forward sweep per sample. Both are overwritten.
void param_grads(const Mlp& net, const GiBatch& batch, std::span<double> g_target,
                 std::span<double> g_gi);

struct UpdateStats {
  /// mean_i |theta_i+ - theta_i|
  double mean_abs_delta = 0.0;
  /// mean_i (|alpha eta g_target_i| + |(1 - alpha) eta g_gi_i|); the two
  /// terms can cancel in the actual step, this counts both.
  double mean_abs_contribution = 0.0;
};

/// theta_i -= alpha eta dE/dtheta_i + (1 - alpha) eta dE_grad/dtheta_i.
/// `g_gi` may be empty when alpha == 1. Throws BadAlpha for alpha outside [0, 1].
UpdateStats apply_update(Mlp& net, std::span<const double> g_target, std::span<const double> g_gi,
                         double learning_rate, double alpha);

/// Text format: "mlp v1 <sizes...> [out=sigmoid]" then one hex-float per line.
void save_mlp(std::ostream& os, const Mlp& net);
Mlp load_mlp(std::istream& is);

}  // namespace gradlore
