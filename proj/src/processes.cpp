#include "gradlore/processes.hpp"

#include "gradlore/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace gradlore {
namespace {

GiBatch make_batch(std::size_t n, std::size_t d_in, std::size_t d_out) {
  return {Matrix(n, d_in), Matrix(n, d_out), Matrix(n, d_out * d_in)};
}

void store(GiBatch& batch, std::size_t i, std::span<const double> x, const Evaluation& ev) {
  std::ranges::copy(x, batch.inputs.row(i).begin());
  std::ranges::copy(ev.values, batch.targets.row(i).begin());
  std::ranges::copy(ev.jacobian.data(), batch.target_grads.row(i).begin());
}

}  // namespace

GiBatch gen_quadratic(std::size_t n, Rng& rng, const QuadraticSpec& spec) {
  GiBatch batch = make_batch(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(spec.lo, spec.hi);
    const double eps = rng.normal();
    batch.inputs(i, 0) = x;
    batch.targets(i, 0) = 2.0 * x * x + spec.noise * eps;
    batch.target_grads(i, 0) = 4.0 * x;
  }
  return batch;
}

GiBatch gen_sine(std::size_t n, Rng& rng, const SineSpec& spec) {
  GiBatch batch = make_batch(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(spec.lo, spec.hi);
    batch.inputs(i, 0) = x;
    batch.targets(i, 0) = std::sin(x);
    batch.target_grads(i, 0) = std::cos(x);
  }
  return batch;
}

Evaluation gen_cosine2d(std::span<const double> theta, const Cosine2dSpec& spec) {
  if (theta.size() != 2) throw Error(ErrorCode::ShapeMismatch, "gen_cosine2d: theta must have 2 entries");
  Evaluation ev{std::vector<double>(spec.times.size()), Matrix(spec.times.size(), 2)};
  for (std::size_t k = 0; k < spec.times.size(); ++k) {
    const double t = spec.times[k];
    const double arg1 = spec.phi * (theta[0] - t - spec.psi);
    const double arg2 = spec.phi * (theta[1] - t - spec.psi);
    const double c1 = std::cos(arg1);
    const double c2 = std::cos(arg2);
    ev.values[k] = (c1 * c2) * (c1 * c2);
    ev.jacobian(k, 0) = -spec.phi * std::sin(2.0 * arg1) * c2 * c2;
    ev.jacobian(k, 1) = -spec.phi * std::sin(2.0 * arg2) * c1 * c1;
  }
  return ev;
}

Evaluation gen_garch(const GarchParams& p) {
  if (!(p.omega >= 0.0 && p.alpha >= 0.0 && p.beta >= 0.0))
    throw Error(ErrorCode::BadParams, "gen_garch: omega, alpha and beta must be >= 0");
  if (!(p.sigma2 > 0.0)) throw Error(ErrorCode::BadParams, "gen_garch: current variance must be > 0");
  if (!std::isfinite(p.u)) throw Error(ErrorCode::BadParams, "gen_garch: return must be finite");
  int max_h = 0;
  for (int h : p.horizons) {
    if (h < 1) throw Error(ErrorCode::BadParams, "gen_garch: horizons must be >= 1");
    max_h = std::max(max_h, h);
  }

  // value and d/d(u, omega, alpha, beta) for h = 1 ... max_h
  std::vector<std::array<double, 5>> path(static_cast<std::size_t>(max_h));
  if (max_h > 0) {
    path[0] = {p.omega + p.alpha * p.u * p.u + p.beta * p.sigma2, 2.0 * p.alpha * p.u, 1.0,
               p.u * p.u, p.sigma2};
  }
  const double persistence = p.alpha + p.beta;
  for (std::size_t h = 1; h < path.size(); ++h) {
    const auto& prev = path[h - 1];
    path[h] = {p.omega + persistence * prev[0], persistence * prev[1], 1.0 + persistence * prev[2],
               prev[0] + persistence * prev[3], prev[0] + persistence * prev[4]};
  }

  Evaluation ev{std::vector<double>(p.horizons.size()), Matrix(p.horizons.size(), 4)};
  for (std::size_t k = 0; k < p.horizons.size(); ++k) {
    const auto& row = path[static_cast<std::size_t>(p.horizons[k] - 1)];
    ev.values[k] = row[0];
    for (std::size_t j = 0; j < 4; ++j) ev.jacobian(k, j) = row[j + 1];
  }
  return ev;
}

Exp8dSpec Exp8dSpec::with_random_design(std::size_t rows, Rng& rng) {
  Exp8dSpec spec;
  spec.design = Matrix(rows, 3);
  for (double& v : spec.design.data()) v = rng.uniform01();
  return spec;
}

Evaluation gen_exp8d(std::span<const double> b, const Matrix& design, const Exp8dSpec& spec) {
  if (b.size() != 8) throw Error(ErrorCode::ShapeMismatch, "gen_exp8d: beta must have 8 entries");
  if (design.cols() != 3) throw Error(ErrorCode::ShapeMismatch, "gen_exp8d: design must have 3 columns");
  Evaluation ev{std::vector<double>(design.rows()), Matrix(design.rows(), 8)};
  for (std::size_t i = 0; i < design.rows(); ++i) {
    const double x0 = design(i, 0);
    const double dx1 = design(i, 1) - spec.alpha_fix;
    const double dx2 = design(i, 2) - spec.eta_fix;
    const double e4 = std::exp(b[3] * dx1);
    const double e7 = std::exp(b[6] * dx2);
    ev.values[i] = b[0] * x0 + b[1] * (b[2] * e4) + b[4] * (b[5] * e7) + b[7];
    auto g = ev.jacobian.row(i);
    g[0] = x0;
    g[1] = b[2] * e4;
    g[2] = b[1] * e4;
    g[3] = b[1] * b[2] * dx1 * e4;
    g[4] = b[5] * e7;
    g[5] = b[4] * e7;
    g[6] = b[4] * b[5] * dx2 * e7;
    g[7] = 1.0;
  }
  return ev;
}

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::quadratic: return "quadratic";
    case ProcessKind::cosine2d: return "cosine2d";
    case ProcessKind::garch: return "garch";
    case ProcessKind::exp8d: return "exp8d";
    case ProcessKind::sine: return "sine";
  }
  return "unknown";
}

ProcessKind parse_process_kind(std::string_view name) {
  for (auto k : {ProcessKind::quadratic, ProcessKind::cosine2d, ProcessKind::garch,
                 ProcessKind::exp8d, ProcessKind::sine}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::Config, "unknown process kind '" + std::string(name) + "'");
}

std::size_t ProcessSpec::input_dim() const {
  switch (kind) {
    case ProcessKind::quadratic:
    case ProcessKind::sine: return 1;
    case ProcessKind::cosine2d: return 2;
    case ProcessKind::garch: return 4;
    case ProcessKind::exp8d: return 8;
  }
  return 0;
}

std::size_t ProcessSpec::output_dim() const {
  switch (kind) {
    case ProcessKind::quadratic:
    case ProcessKind::sine: return 1;
    case ProcessKind::cosine2d: return cosine2d.times.size();
    case ProcessKind::garch: return garch.horizons.size();
    case ProcessKind::exp8d: return exp8d.design.rows();
  }
  return 0;
}

Evaluation ProcessSpec::evaluate(std::span<const double> input) const {
  if (input.size() != input_dim()) throw Error(ErrorCode::ShapeMismatch, "ProcessSpec::evaluate: input size");
  switch (kind) {
    case ProcessKind::quadratic:
      return {{2.0 * input[0] * input[0]}, Matrix{{4.0 * input[0]}}};
    case ProcessKind::sine:
      return {{std::sin(input[0])}, Matrix{{std::cos(input[0])}}};
    case ProcessKind::cosine2d:
      return gen_cosine2d(input, cosine2d);
    case ProcessKind::garch: {
      GarchParams p{input[0], input[1], input[2], input[3], garch.sigma2, garch.horizons};
      return gen_garch(p);
    }
    case ProcessKind::exp8d:
      return gen_exp8d(input, exp8d.design, exp8d);
  }
  throw Error(ErrorCode::BadParams, "ProcessSpec::evaluate: unknown kind");
}

std::vector<std::pair<double, double>> ProcessSpec::input_box() const {
  switch (kind) {
    case ProcessKind::quadratic: return {{quadratic.lo, quadratic.hi}};
    case ProcessKind::sine: return {{sine.lo, sine.hi}};
    case ProcessKind::cosine2d:
      return {{cosine2d.theta_lo, cosine2d.theta_hi}, {cosine2d.theta_lo, cosine2d.theta_hi}};
    case ProcessKind::garch:
      return {{-garch.u_max, garch.u_max}, {0.0, garch.omega_max}, {0.0, garch.alpha_max},
              {0.0, garch.beta_max}};
    case ProcessKind::exp8d:
      return std::vector<std::pair<double, double>>(8, {exp8d.beta_lo, exp8d.beta_hi});
  }
  return {};
}

std::vector<double> ProcessSpec::sample_input(Rng& rng) const {
  const auto box = input_box();
  std::vector<double> x(box.size());
  if (kind == ProcessKind::garch) {
    // Stationary parameters only.
    do {
      for (std::size_t j = 0; j < box.size(); ++j) x[j] = rng.uniform(box[j].first, box[j].second);
    } while (!(x[2] + x[3] < 1.0));
    return x;
  }
  for (std::size_t j = 0; j < box.size(); ++j) x[j] = rng.uniform(box[j].first, box[j].second);
  return x;
}

GiBatch generate(const ProcessSpec& spec, std::size_t n, Rng& rng) {
  if (spec.kind == ProcessKind::quadratic) return gen_quadratic(n, rng, spec.quadratic);
  if (spec.kind == ProcessKind::sine) return gen_sine(n, rng, spec.sine);
  GiBatch batch = make_batch(n, spec.input_dim(), spec.output_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = spec.sample_input(rng);
    store(batch, i, x, spec.evaluate(x));
  }
  return batch;
}

GiBatch rescale_inputs(const GiBatch& batch, std::span<const double> center,
                       std::span<const double> scale) {
  const std::size_t d_in = batch.input_dim();
  const std::size_t d_out = batch.output_dim();
  if (center.size() != d_in || scale.size() != d_in)
    throw Error(ErrorCode::ShapeMismatch, "rescale_inputs: center/scale size differs from input dim");
  GiBatch out = batch;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = 0; j < d_in; ++j) out.inputs(i, j) = (batch.inputs(i, j) - center[j]) / scale[j];
    for (std::size_t o = 0; o < d_out; ++o)
      for (std::size_t j = 0; j < d_in; ++j) out.target_grads(i, o * d_in + j) *= scale[j];
  }
  return out;
}

}  // namespace gradlore
