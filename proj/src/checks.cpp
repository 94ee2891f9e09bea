#include "gradlore/checks.hpp"

#include "gradlore/error.hpp"
#include "gradlore/mlp.hpp"
#include "gradlore/numerics/fd.hpp"
#include "gradlore/parallel.hpp"
#include "gradlore/processes.hpp"
#include "gradlore/ridgegrad.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace gradlore {

namespace {

struct NetCase {
  Mlp net;
  GiBatch batch;
};

NetCase random_net_case(Rng& rng) {
  std::vector<std::size_t> sizes{1 + rng.below(4)};
  const std::size_t hidden = 1 + rng.below(3);
  for (std::size_t h = 0; h < hidden; ++h) sizes.push_back(1 + rng.below(8));
  sizes.push_back(1 + rng.below(3));
  const auto out = rng.below(3) == 0 ? OutputActivation::sigmoid : OutputActivation::identity;
  Mlp net = Mlp::random(sizes, out, rng);
  for (double& p : net.params()) p += rng.normal(0.0, 0.1);
  const std::size_t n = 1 + rng.below(5);
  const std::size_t d_in = sizes.front(), d_out = sizes.back();
  GiBatch batch{Matrix(n, d_in), Matrix(n, d_out), Matrix(n, d_in * d_out)};
  for (double& v : batch.inputs.data()) v = rng.normal();
  for (double& v : batch.targets.data()) v = rng.normal();
  for (double& v : batch.target_grads.data()) v = rng.normal();
  return {std::move(net), std::move(batch)};
}

// Runs `trial(rng)` per case, each on its own stream, and tallies errors.
CheckResult tally(std::string name, double tol, std::size_t cases, std::uint64_t seed,
                  const std::function<double(Rng&)>& trial) {
  CheckResult r{std::move(name), 0, cases, 0.0, tol};
  for (std::size_t i = 0; i < cases; ++i) {
    Rng rng = Rng::derive(seed, i);
    const double err = trial(rng);
    if (err <= tol) ++r.passed;
    if (!(err <= r.worst)) r.worst = err;
  }
  return r;
}

std::vector<double> fd_param_grad(const Mlp& net, double (*loss)(const Mlp&, const GiBatch&), const GiBatch& batch) {
  Mlp probe = net;
  return fd_gradient(
      [&](std::span<const double> p) {
        std::copy(p.begin(), p.end(), probe.params().begin());
        return loss(probe, batch);
      },
      net.params(), 1e-5);
}

double unrolled_garch(double u, double omega, double alpha, double beta, double sigma2, int h) {
  double s = omega + alpha * u * u + beta * sigma2;
  for (int k = 2; k <= h; ++k) s = omega + (alpha + beta) * s;
  return s;
}

std::vector<double> gauss_solve(std::vector<std::vector<double>> m, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[piv], m[col]);
    std::swap(b[piv], b[col]);
    if (m[col][col] == 0.0) throw Error(ErrorCode::NotSpd, "oracle: singular Newton system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
    x[i] = s / m[i][i];
  }
  return x;
}

// Damped Newton with FD gradient and Hessian; exact on quadratics up to FD noise.
std::vector<double> newton_minimise(const std::function<double(std::span<const double>)>& f, std::vector<double> x) {
  const std::size_t n = x.size();
  for (int it = 0; it < 8; ++it) {
    const auto g = fd_gradient(f, x, 1e-5);
    std::vector<std::vector<double>> hess(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
      auto xp = x, xm = x;
      xp[j] += 1e-4;
      xm[j] -= 1e-4;
      const auto gp = fd_gradient(f, xp, 1e-5);
      const auto gm = fd_gradient(f, xm, 1e-5);
      for (std::size_t i = 0; i < n; ++i) hess[i][j] = (gp[i] - gm[i]) / 2e-4;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) hess[i][j] = hess[j][i] = 0.5 * (hess[i][j] + hess[j][i]);
    const auto step = gauss_solve(hess, g);
    const double f0 = f(x);
    double t = 1.0;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      auto trial = x;
      for (std::size_t i = 0; i < n; ++i) trial[i] -= t * step[i];
      if (f(trial) <= f0) {
        x = trial;
        break;
      }
    }
  }
  return x;
}

struct RgInstance {
  Matrix phi;
  std::vector<double> z, bg;
  double l1 = 0.0, l2 = 0.0;
};

RgInstance random_rg_instance(Rng& rng, bool allow_zero_l2) {
  const std::size_t n = 6 + rng.below(15);
  const std::size_t centres = 2 + rng.below(7);
  const auto basis = RbfBasis::evenly_spaced(centres, 0.0, 2 * std::numbers::pi, rng.uniform(0.5, 2.0));
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(0.0, 2 * std::numbers::pi);
  RgInstance r{rbf_design(x, basis), std::vector<double>(n), std::vector<double>(centres + 1), 0.0, 0.0};
  for (auto& v : r.z) v = rng.normal();
  for (auto& v : r.bg) v = rng.normal();
  r.l1 = rng.uniform(0.01, 1.0);
  r.l2 = allow_zero_l2 && rng.below(4) == 0 ? 0.0 : rng.uniform(0.01, 1.0);
  return r;
}

}  // namespace

CheckResult check_input_jacobians(std::size_t cases, std::uint64_t seed) {
  return tally("input_jacobian_vs_fd", 1e-6, cases, seed, [](Rng& rng) {
    const auto c = random_net_case(rng);
    const auto x = c.batch.x(0);
    const auto analytic = input_jacobian(c.net, x);
    const auto numeric = fd_jacobian([&](std::span<const double> p) { return forward(c.net, p); }, x, 1e-5);
    return norm_relative_error(analytic.data(), numeric.data());
  });
}

CheckResult check_param_grad_target(std::size_t cases, std::uint64_t seed) {
  return tally("param_grad_target_vs_fd", 1e-5, cases, seed, [](Rng& rng) {
    const auto c = random_net_case(rng);
    return norm_relative_error(param_grad_target(c.net, c.batch), fd_param_grad(c.net, target_loss, c.batch));
  });
}

CheckResult check_param_grad_gi(std::size_t cases, std::uint64_t seed) {
  return tally("param_grad_gi_vs_fd", 1e-4, cases, seed, [](Rng& rng) {
    const auto c = random_net_case(rng);
    return norm_relative_error(param_grad_gi(c.net, c.batch), fd_param_grad(c.net, gi_loss, c.batch));
  });
}

CheckResult check_garch_recursion(std::size_t cases, std::uint64_t seed) {
  ProcessSpec spec;
  spec.kind = ProcessKind::garch;
  return tally("garch_vs_recursion", 1e-8, cases, seed, [&](Rng& rng) {
    const auto x = spec.sample_input(rng);
    const auto ev = spec.evaluate(x);
    double worst = 0.0;
    for (std::size_t k = 0; k < spec.garch.horizons.size(); ++k) {
      const double bf = unrolled_garch(x[0], x[1], x[2], x[3], spec.garch.sigma2, spec.garch.horizons[k]);
      worst = std::max(worst, relative_error(ev.values[k], bf));
    }
    return worst;
  });
}

CheckResult check_garch_fd(std::size_t cases, std::uint64_t seed) {
  ProcessSpec spec;
  spec.kind = ProcessKind::garch;
  return tally("garch_jacobian_vs_fd", 1e-5, cases, seed, [&](Rng& rng) {
    // Central differences need the stencil inside the valid region.
    auto x = spec.sample_input(rng);
    while (x[1] < 1e-4 || x[2] < 1e-4 || x[3] < 1e-4 || x[2] + x[3] > 1.0 - 1e-4) x = spec.sample_input(rng);
    const auto ev = spec.evaluate(x);
    const auto num = fd_jacobian([&](std::span<const double> p) { return spec.evaluate(p).values; }, x, 1e-5);
    return norm_relative_error(ev.jacobian.data(), num.data());
  });
}

CheckResult check_rg_closed_form(std::size_t cases, std::uint64_t seed) {
  return tally("rg_closed_form_vs_minimiser", 1e-6, cases, seed, [](Rng& rng) {
    const auto in = random_rg_instance(rng, true);
    const auto closed = fit_ridge_gradients(in.phi, in.z, in.bg, in.l1, in.l2);
    const auto numeric = newton_minimise(
        [&](std::span<const double> b) {
          double s = 0.0;
          for (std::size_t n = 0; n < in.phi.rows(); ++n) {
            double fit = 0.0;
            for (std::size_t j = 0; j < in.phi.cols(); ++j) fit += in.phi(n, j) * b[j];
            s += (in.z[n] - fit) * (in.z[n] - fit);
          }
          for (std::size_t j = 0; j < b.size(); ++j)
            s += in.l1 * b[j] * b[j] + in.l2 * (b[j] - in.bg[j]) * (b[j] - in.bg[j]);
          return s;
        },
        std::vector<double>(closed.size(), 0.0));
    double d = 0.0;
    for (std::size_t j = 0; j < closed.size(); ++j)
      d = std::max(d, std::abs(closed[j] - numeric[j]) / std::max(1.0, std::abs(numeric[j])));
    return d;
  });
}

CheckResult check_rg_ridge_reduction(std::size_t cases, std::uint64_t seed) {
  return tally("rg_lambda2_zero_is_ridge", 0.0, cases, seed, [](Rng& rng) {
    const auto in = random_rg_instance(rng, false);
    const auto rg = fit_ridge_gradients(in.phi, in.z, in.bg, in.l1, 0.0);
    const auto ridge = fit_ridge(in.phi, in.z, in.l1);
    double d = 0.0;
    for (std::size_t j = 0; j < rg.size(); ++j) d = std::max(d, std::abs(rg[j] - ridge[j]));
    return d;
  });
}

std::vector<CheckResult> run_oracle_checks(std::uint64_t seed, std::size_t jobs) {
  using Fn = CheckResult (*)(std::size_t, std::uint64_t);
  const std::vector<std::pair<Fn, std::size_t>> plan{
      {check_input_jacobians, 200}, {check_param_grad_target, 200}, {check_param_grad_gi, 200},
      {check_garch_recursion, 1000}, {check_garch_fd, 1000},        {check_rg_closed_form, 100},
      {check_rg_ridge_reduction, 100}};
  std::vector<CheckResult> out(plan.size());
  parallel_for(plan.size(), jobs, [&](std::size_t i) { out[i] = plan[i].first(plan[i].second, seed + i); });
  return out;
}

}  // namespace gradlore
