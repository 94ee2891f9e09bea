#include "gradlore/mlp.hpp"

#include "gradlore/error.hpp"
#include "gradlore/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gradlore {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> layer_sizes, OutputActivation output)
    : sizes_(std::move(layer_sizes)), output_(output) {
  require(sizes_.size() >= 2, "Mlp: need at least input and output sizes");
  for (std::size_t s : sizes_) require(s > 0, "Mlp: layer sizes must be positive");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::random(std::vector<std::size_t> layer_sizes, OutputActivation output, Rng& rng) {
  Mlp net(std::move(layer_sizes), output);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const double stddev = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    for (double& w : net.weights(l)) w = rng.normal(0.0, stddev);
  }
  return net;
}

std::span<double> Mlp::weights(std::size_t layer) {
  return std::span<double>(params_).subspan(offsets_.at(layer), sizes_[layer] * sizes_[layer + 1]);
}
std::span<const double> Mlp::weights(std::size_t layer) const {
  return std::span<const double>(params_).subspan(offsets_.at(layer),
                                                  sizes_[layer] * sizes_[layer + 1]);
}
std::span<double> Mlp::biases(std::size_t layer) {
  return std::span<double>(params_).subspan(bias_offset(layer), sizes_.at(layer + 1));
}
std::span<const double> Mlp::biases(std::size_t layer) const {
  return std::span<const double>(params_).subspan(bias_offset(layer), sizes_.at(layer + 1));
}

void trace_forward(const Mlp& net, std::span<const double> x, ForwardTrace& trace) {
  require(x.size() == net.input_dim(), "forward: input size differs from network input dim");
  const auto& k = simd::active();
  const auto& sizes = net.layer_sizes();
  trace.activations.resize(sizes.size());
  trace.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < net.depth(); ++l) {
    auto& a = trace.activations[l + 1];
    a.resize(sizes[l + 1]);
    k.gemv(net.weights(l).data(), sizes[l + 1], sizes[l], trace.activations[l].data(),
           net.biases(l).data(), a.data());
    const bool hidden = l + 1 < net.depth();
    if (hidden) {
      for (double& v : a) v = std::tanh(v);
    } else if (net.output_activation() == OutputActivation::sigmoid) {
      for (double& v : a) v = sigmoid(v);
    }
  }
}

ForwardTrace trace_forward(const Mlp& net, std::span<const double> x) {
  ForwardTrace trace;
  trace_forward(net, x, trace);
  return trace;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
  return std::move(trace_forward(net, x).activations.back());
}

void trace_jacobian(const Mlp& net, std::span<const double> x, JacobianTrace& jt) {
  trace_forward(net, x, jt.forward);
  const auto& k = simd::active();
  const auto& sizes = net.layer_sizes();
  const std::size_t d_in = net.input_dim();
  const std::size_t depth = net.depth();
  jt.tangents.resize(depth);
  jt.pre_tangents.resize(depth);

  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t rows = sizes[l + 1];
    const std::size_t cols = sizes[l];
    const auto w = net.weights(l);
    Matrix& q = jt.pre_tangents[l];
    q.assign_zero(d_in, rows);
    if (l == 0) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d_in; ++j) q(j, r) = w[r * cols + j];
    } else {
      for (std::size_t j = 0; j < d_in; ++j)
        k.gemv(w.data(), rows, cols, jt.tangents[l].row(j).data(), nullptr, q.row(j).data());
    }

    const auto& a = jt.forward.activations[l + 1];
    const bool hidden = l + 1 < depth;
    std::vector<double> slope(rows, 1.0);
    for (std::size_t r = 0; r < rows; ++r) {
      if (hidden) {
        slope[r] = 1.0 - a[r] * a[r];
      } else if (net.output_activation() == OutputActivation::sigmoid) {
        slope[r] = a[r] * (1.0 - a[r]);
      }
    }
    if (hidden) {
      Matrix& p = jt.tangents[l + 1];
      p.assign_zero(d_in, rows);
      for (std::size_t j = 0; j < d_in; ++j)
        for (std::size_t r = 0; r < rows; ++r) p(j, r) = slope[r] * q(j, r);
    } else {
      jt.jacobian.assign_zero(rows, d_in);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d_in; ++j) jt.jacobian(r, j) = slope[r] * q(j, r);
    }
  }
}

JacobianTrace trace_jacobian(const Mlp& net, std::span<const double> x) {
  JacobianTrace jt;
  trace_jacobian(net, x, jt);
  return jt;
}

Matrix input_jacobian(const Mlp& net, std::span<const double> x) {
  return std::move(trace_jacobian(net, x).jacobian);
}

std::vector<double> output_logit_grad(const Mlp& net, const ForwardTrace& trace,
                                      std::span<const double> dloss_doutput) {
  const auto y = trace.output();
  require(dloss_doutput.size() == y.size(), "output_logit_grad: gradient size differs from output");
  std::vector<double> g(dloss_doutput.begin(), dloss_doutput.end());
  if (net.output_activation() == OutputActivation::sigmoid) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
  }
  return g;
}

namespace {

struct BackpropScratch {
  std::vector<double> delta, back, dz, dz_prev, da;
  Matrix dq, dq_prev, dp;
};

BackpropScratch& scratch() {
  thread_local BackpropScratch s;
  return s;
}

}  // namespace

void backprop(const Mlp& net, const ForwardTrace& trace, std::span<const double> dloss_dlogits,
              std::span<double> param_grad, std::span<double> input_grad) {
  require(dloss_dlogits.size() == net.output_dim(), "backprop: seed size differs from output dim");
  require(param_grad.empty() || param_grad.size() == net.parameter_count(),
          "backprop: parameter gradient size mismatch");
  require(input_grad.empty() || input_grad.size() == net.input_dim(),
          "backprop: input gradient size mismatch");
  const auto& k = simd::active();
  const auto& sizes = net.layer_sizes();
  auto& s = scratch();

  s.delta.assign(dloss_dlogits.begin(), dloss_dlogits.end());
  for (std::size_t l = net.depth(); l-- > 0;) {
    const std::size_t rows = sizes[l + 1];
    const std::size_t cols = sizes[l];
    const auto& a_in = trace.activations[l];
    if (!param_grad.empty()) {
      k.ger_acc(param_grad.data() + net.weight_offset(l), rows, cols, s.delta.data(), a_in.data());
      double* gb = param_grad.data() + net.bias_offset(l);
      for (std::size_t r = 0; r < rows; ++r) gb[r] += s.delta[r];
    }
    if (l == 0 && input_grad.empty()) break;
    s.back.assign(cols, 0.0);
    k.gemv_t_acc(net.weights(l).data(), rows, cols, s.delta.data(), s.back.data());
    if (l == 0) {
      std::ranges::copy(s.back, input_grad.begin());
      break;
    }
    for (std::size_t c = 0; c < cols; ++c) s.back[c] *= 1.0 - a_in[c] * a_in[c];
    std::swap(s.delta, s.back);
  }
}

// Reverse sweep over the graph built by trace_jacobian. Per layer l with
// input activation a_l, input tangent P_l, z_l = W a_l + b, Q_l = W P_l:
//   dW += dz a_l^T + dQ P_l^T      (layer 0: dW += dQ, since P_0 = I)
//   da_l = W^T dz,  dP_l = W^T dQ
// and through a hidden tanh a_l = tanh(z), P_l = diag(s) Q with s = 1 - a^2:
//   dQ = diag(s) dP,  dz = da * s + rowdot(dP, Q) * (-2 a s).
// Tangents and their adjoints are held transposed (one row per input j).
void jacobian_backprop(const Mlp& net, const JacobianTrace& jt,
                       std::span<const double> dloss_doutput, const Matrix& dloss_djac,
                       std::span<double> param_grad, std::span<double> input_grad) {
  const auto& sizes = net.layer_sizes();
  const std::size_t d_in = net.input_dim();
  const std::size_t d_out = net.output_dim();
  const std::size_t depth = net.depth();
  require(dloss_doutput.empty() || dloss_doutput.size() == d_out,
          "jacobian_backprop: output seed size mismatch");
  require(dloss_djac.rows() == d_out && dloss_djac.cols() == d_in,
          "jacobian_backprop: Jacobian seed must be d_out x d_in");
  require(param_grad.empty() || param_grad.size() == net.parameter_count(),
          "jacobian_backprop: parameter gradient size mismatch");
  require(input_grad.empty() || input_grad.size() == d_in,
          "jacobian_backprop: input gradient size mismatch");
  const auto& k = simd::active();
  auto& s = scratch();

  // Seeds at the output pre-activation.
  const auto& y = jt.forward.activations.back();
  const Matrix& q_out = jt.pre_tangents[depth - 1];
  s.dz.assign(d_out, 0.0);
  s.dq.assign_zero(d_in, d_out);
  for (std::size_t r = 0; r < d_out; ++r) {
    double slope = 1.0;
    double curvature = 0.0;
    if (net.output_activation() == OutputActivation::sigmoid) {
      slope = y[r] * (1.0 - y[r]);
      curvature = slope * (1.0 - 2.0 * y[r]);
    }
    if (!dloss_doutput.empty()) s.dz[r] = dloss_doutput[r] * slope;
    double acc = 0.0;
    for (std::size_t j = 0; j < d_in; ++j) {
      s.dq(j, r) = slope * dloss_djac(r, j);
      acc += dloss_djac(r, j) * q_out(j, r);
    }
    if (curvature != 0.0) s.dz[r] += acc * curvature;
  }

  for (std::size_t l = depth; l-- > 0;) {
    const std::size_t rows = sizes[l + 1];
    const std::size_t cols = sizes[l];
    const auto w = net.weights(l);
    const auto& a_in = jt.forward.activations[l];

    if (!param_grad.empty()) {
      double* gw = param_grad.data() + net.weight_offset(l);
      k.ger_acc(gw, rows, cols, s.dz.data(), a_in.data());
      if (l == 0) {
        for (std::size_t j = 0; j < d_in; ++j)
          for (std::size_t r = 0; r < rows; ++r) gw[r * cols + j] += s.dq(j, r);
      } else {
        const Matrix& p = jt.tangents[l];
        for (std::size_t j = 0; j < d_in; ++j) k.ger_acc(gw, rows, cols, s.dq.row(j).data(), p.row(j).data());
      }
      double* gb = param_grad.data() + net.bias_offset(l);
      for (std::size_t r = 0; r < rows; ++r) gb[r] += s.dz[r];
    }

    if (l == 0) {
      if (!input_grad.empty()) {
        std::ranges::fill(input_grad, 0.0);
        k.gemv_t_acc(w.data(), rows, cols, s.dz.data(), input_grad.data());
      }
      break;
    }

    s.da.assign(cols, 0.0);
    k.gemv_t_acc(w.data(), rows, cols, s.dz.data(), s.da.data());
    s.dp.assign_zero(d_in, cols);
    for (std::size_t j = 0; j < d_in; ++j) k.gemv_t_acc(w.data(), rows, cols, s.dq.row(j).data(), s.dp.row(j).data());

    // Through the tanh producing a_l.
    const Matrix& q_prev = jt.pre_tangents[l - 1];
    s.back.assign(cols, 0.0);
    s.dq_prev.assign_zero(d_in, cols);
    for (std::size_t j = 0; j < d_in; ++j) {
      const auto dp = s.dp.row(j);
      const auto qp = q_prev.row(j);
      auto dqp = s.dq_prev.row(j);
      for (std::size_t c = 0; c < cols; ++c) {
        const double a = a_in[c];
        dqp[c] = (1.0 - a * a) * dp[c];
        s.back[c] += dp[c] * qp[c];
      }
    }
    s.dz_prev.resize(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      const double a = a_in[c];
      const double slope = 1.0 - a * a;
      s.dz_prev[c] = s.da[c] * slope + s.back[c] * (-2.0 * a * slope);
    }
    std::swap(s.dz, s.dz_prev);
    std::swap(s.dq, s.dq_prev);
  }
}

double target_loss(const Mlp& net, const GiBatch& batch) {
  require(batch.size() > 0, "target_loss: empty batch");
  require(batch.input_dim() == net.input_dim() && batch.output_dim() == net.output_dim(),
          "target_loss: batch dimensions differ from network");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto y = forward(net, batch.x(i));
    const auto z = batch.z(i);
    for (std::size_t j = 0; j < y.size(); ++j) total += (z[j] - y[j]) * (z[j] - y[j]);
  }
  return total / static_cast<double>(batch.size());
}

double gi_loss(const Mlp& net, const GiBatch& batch) {
  require(batch.size() > 0, "gi_loss: empty batch");
  require(batch.input_dim() == net.input_dim() && batch.output_dim() == net.output_dim(),
          "gi_loss: batch dimensions differ from network");
  double total = 0.0;
  JacobianTrace jt;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    trace_jacobian(net, batch.x(i), jt);
    const auto g = batch.grad(i);
    const auto j = jt.jacobian.data();
    for (std::size_t e = 0; e < j.size(); ++e) total += (g[e] - j[e]) * (g[e] - j[e]);
  }
  return total / static_cast<double>(batch.size());
}

void param_grads(const Mlp& net, const GiBatch& batch, std::span<double> g_target,
                 std::span<double> g_gi) {
  require(batch.size() > 0, "param_grads: empty batch");
  require(batch.input_dim() == net.input_dim() && batch.output_dim() == net.output_dim(),
          "param_grads: batch dimensions differ from network");
  require(g_target.empty() || g_target.size() == net.parameter_count(),
          "param_grads: target gradient size mismatch");
  const bool want_gi = !g_gi.empty();
  require(!want_gi || g_gi.size() == net.parameter_count(), "param_grads: GI gradient size mismatch");
  require(!want_gi || batch.target_grads.cols() == net.input_dim() * net.output_dim(),
          "param_grads: target gradients must be d_out x d_in per sample");
  std::ranges::fill(g_target, 0.0);
  std::ranges::fill(g_gi, 0.0);

  const double scale = 2.0 / static_cast<double>(batch.size());
  thread_local JacobianTrace jt;
  thread_local std::vector<double> seed;
  thread_local Matrix jac_seed;
  seed.resize(net.output_dim());
  jac_seed.assign_zero(net.output_dim(), net.input_dim());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (want_gi) {
      trace_jacobian(net, batch.x(i), jt);
    } else {
      trace_forward(net, batch.x(i), jt.forward);
    }
    if (!g_target.empty()) {
      const auto y = jt.forward.output();
      const auto z = batch.z(i);
      const bool sig = net.output_activation() == OutputActivation::sigmoid;
      for (std::size_t j = 0; j < seed.size(); ++j) {
        seed[j] = scale * (y[j] - z[j]);
        if (sig) seed[j] *= y[j] * (1.0 - y[j]);
      }
      backprop(net, jt.forward, seed, g_target, {});
    }
    if (want_gi) {
      const auto g = batch.grad(i);
      const auto j = jt.jacobian.data();
      auto sd = jac_seed.data();
      for (std::size_t e = 0; e < sd.size(); ++e) sd[e] = scale * (j[e] - g[e]);
      jacobian_backprop(net, jt, {}, jac_seed, g_gi, {});
    }
  }
}

ParamGrad param_grad_target(const Mlp& net, const GiBatch& batch) {
  ParamGrad grad(net.parameter_count(), 0.0);
  param_grads(net, batch, grad, {});
  return grad;
}

ParamGrad param_grad_gi(const Mlp& net, const GiBatch& batch) {
  ParamGrad grad(net.parameter_count(), 0.0);
  ParamGrad unused;
  param_grads(net, batch, unused, grad);
  return grad;
}

UpdateStats apply_update(Mlp& net, std::span<const double> g_target, std::span<const double> g_gi,
                         double learning_rate, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::BadAlpha, "apply_update: alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  auto theta = net.params();
  require(g_target.size() == theta.size(), "apply_update: target gradient size mismatch");
  const bool use_gi = alpha < 1.0;
  require(!use_gi || g_gi.size() == theta.size(), "apply_update: GI gradient size mismatch");

  const double target_rate = alpha * learning_rate;
  const double gi_rate = (1.0 - alpha) * learning_rate;
  double delta_sum = 0.0;
  double contribution_sum = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double before = theta[i];
    double step = target_rate * g_target[i];
    double contribution = std::abs(step);
    if (use_gi) {
      const double step_gi = gi_rate * g_gi[i];
      step += step_gi;
      contribution += std::abs(step_gi);
    }
    const double next = before - step;
    theta[i] = next;
    delta_sum += std::abs(next - before);
    contribution_sum += contribution;
  }
  const double n = theta.empty() ? 1.0 : static_cast<double>(theta.size());
  return {delta_sum / n, contribution_sum / n};
}

}  // namespace gradlore
