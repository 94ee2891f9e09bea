#include "doctest.h"

#include "gradlore/error.hpp"
#include "gradlore/mlp.hpp"
#include "gradlore/numerics/fd.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

using namespace gradlore;

namespace {

struct Case {
  Mlp net;
  GiBatch batch;
};

Case random_case(Rng& rng, bool allow_sigmoid = true) {
  std::vector<std::size_t> sizes{1 + rng.below(4)};
  const std::size_t hidden = 1 + rng.below(3);
  for (std::size_t h = 0; h < hidden; ++h) sizes.push_back(1 + rng.below(8));
  sizes.push_back(1 + rng.below(3));
  const auto out = (allow_sigmoid && rng.below(3) == 0) ? OutputActivation::sigmoid : OutputActivation::identity;
  Mlp net = Mlp::random(sizes, out, rng);
  for (double& b : net.params()) b += rng.normal(0.0, 0.1);  // non-zero biases too

  const std::size_t n = 1 + rng.below(5);
  const std::size_t d_in = sizes.front(), d_out = sizes.back();
  GiBatch batch{Matrix(n, d_in), Matrix(n, d_out), Matrix(n, d_in * d_out)};
  for (double& v : batch.inputs.data()) v = rng.normal();
  for (double& v : batch.targets.data()) v = rng.normal();
  for (double& v : batch.target_grads.data()) v = rng.normal();
  return {std::move(net), std::move(batch)};
}

std::vector<double> fd_param_grad(const Mlp& net, double (*loss)(const Mlp&, const GiBatch&),
                                  const GiBatch& batch) {
  Mlp probe = net;
  return fd_gradient(
      [&](std::span<const double> p) {
        std::copy(p.begin(), p.end(), probe.params().begin());
        return loss(probe, batch);
      },
      net.params(), 1e-5);
}

Mlp unit_tanh_net() {
  Mlp net({1, 1, 1});
  net.weights(0)[0] = 1.0;
  net.weights(1)[0] = 1.0;
  return net;
}

}  // namespace

TEST_CASE("forward and Jacobian of trivial nets") {
  Mlp zero({3, 5, 2});
  const std::vector<double> x{0.3, -1.0, 2.0};
  CHECK(forward(zero, x) == std::vector<double>{0.0, 0.0});
  const Matrix zero_jac = input_jacobian(zero, x);
  for (double v : zero_jac.data()) CHECK(v == 0.0);

  const Mlp unit = unit_tanh_net();
  for (double v : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    CHECK(forward(unit, std::vector<double>{v})[0] == doctest::Approx(std::tanh(v)).epsilon(1e-15));
  }
  CHECK(input_jacobian(unit, std::vector<double>{0.0})(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("parameter count and layout") {
  const Mlp net({3, 4, 2});
  CHECK(net.parameter_count() == 3 * 4 + 4 + 4 * 2 + 2);
  CHECK(net.weight_offset(1) == 16);
  CHECK(net.bias_offset(1) == 24);
  CHECK_THROWS_AS(forward(net, std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("input Jacobian matches finite differences over 200 random nets") {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_case(rng);
    const auto x = c.batch.x(0);
    const auto analytic = input_jacobian(c.net, x);
    const auto numeric = fd_jacobian([&](std::span<const double> p) { return forward(c.net, p); }, x, 1e-5);
    worst = std::max(worst, norm_relative_error(analytic.data(), numeric.data()));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("param_grad_target closed forms") {
  SUBCASE("perfect fit gives zero gradient") {
    Rng rng(3);
    auto c = random_case(rng, false);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      const auto y = forward(c.net, c.batch.x(i));
      std::copy(y.begin(), y.end(), c.batch.targets.row(i).begin());
    }
    for (double g : param_grad_target(c.net, c.batch)) CHECK(g == 0.0);
  }
  SUBCASE("single-sample linear regression") {
    Mlp lin({2, 1});
    lin.weights(0)[0] = 0.5;
    lin.weights(0)[1] = -1.5;
    lin.biases(0)[0] = 0.25;
    GiBatch b{Matrix{{2.0, 3.0}}, Matrix{{1.0}}, Matrix{{0.0, 0.0}}};
    const double yhat = 0.5 * 2.0 - 1.5 * 3.0 + 0.25;
    const double r = 1.0 - yhat;
    const auto g = param_grad_target(lin, b);
    CHECK(g[0] == doctest::Approx(-2 * r * 2.0));
    CHECK(g[1] == doctest::Approx(-2 * r * 3.0));
    CHECK(g[2] == doctest::Approx(-2 * r));
  }
}

TEST_CASE("param_grad_gi closed forms") {
  SUBCASE("matching Jacobian gives zero gradient") {
    Rng rng(4);
    auto c = random_case(rng);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      const auto j = input_jacobian(c.net, c.batch.x(i));
      std::copy(j.data().begin(), j.data().end(), c.batch.target_grads.row(i).begin());
    }
    for (double g : param_grad_gi(c.net, c.batch)) CHECK(g == 0.0);
  }
  SUBCASE("scalar linear net: E_grad = (g - w)^2") {
    Mlp lin({1, 1});
    lin.weights(0)[0] = 0.8;
    lin.biases(0)[0] = -3.0;
    GiBatch b{Matrix{{1.7}}, Matrix{{0.0}}, Matrix{{2.5}}};
    CHECK(gi_loss(lin, b) == doctest::Approx((2.5 - 0.8) * (2.5 - 0.8)));
    const auto g = param_grad_gi(lin, b);
    CHECK(g[0] == doctest::Approx(-2 * (2.5 - 0.8)));
    CHECK(g[1] == 0.0);
  }
}

TEST_CASE("parameter gradients match central differences over 200 random nets") {
  Rng rng(12);
  double worst_target = 0.0;
  double worst_gi = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_case(rng);
    worst_target = std::max(worst_target, norm_relative_error(param_grad_target(c.net, c.batch),
                                                              fd_param_grad(c.net, target_loss, c.batch)));
    worst_gi = std::max(worst_gi, norm_relative_error(param_grad_gi(c.net, c.batch),
                                                      fd_param_grad(c.net, gi_loss, c.batch)));
  }
  CHECK(worst_target <= 1e-5);
  CHECK(worst_gi <= 1e-4);
}

TEST_CASE("double backprop input gradient matches finite differences") {
  // d/dx of a loss on the input Jacobian, as a frozen network is used by the
  // GAN generator update.
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_case(rng);
    const auto x = c.batch.x(0);
    const auto target = c.batch.grad(0);
    std::vector<double> out_weights(c.net.output_dim());
    for (auto& w : out_weights) w = rng.normal();
    auto loss = [&](std::span<const double> p) {
      const auto jt = trace_jacobian(c.net, p);
      double s = 0.0;
      for (std::size_t e = 0; e < target.size(); ++e) {
        const double d = jt.jacobian.data()[e] - target[e];
        s += d * d;
      }
      const auto y = jt.forward.output();
      for (std::size_t o = 0; o < y.size(); ++o) s += out_weights[o] * y[o];
      return s;
    };
    const auto jt = trace_jacobian(c.net, x);
    Matrix seed(c.net.output_dim(), c.net.input_dim());
    for (std::size_t e = 0; e < target.size(); ++e) seed.data()[e] = 2.0 * (jt.jacobian.data()[e] - target[e]);
    std::vector<double> analytic(c.net.input_dim());
    jacobian_backprop(c.net, jt, out_weights, seed, {}, analytic);
    const auto numeric = fd_gradient(loss, x, 1e-5);
    CHECK(norm_relative_error(analytic, numeric) <= 1e-5);
  }
}

TEST_CASE("backprop input gradient matches finite differences") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_case(rng);
    const auto x = c.batch.x(0);
    std::vector<double> w(c.net.output_dim());
    for (auto& v : w) v = rng.normal();
    auto loss = [&](std::span<const double> p) {
      const auto y = forward(c.net, p);
      double s = 0.0;
      for (std::size_t o = 0; o < y.size(); ++o) s += w[o] * y[o];
      return s;
    };
    const auto trace = trace_forward(c.net, x);
    std::vector<double> analytic(c.net.input_dim());
    backprop(c.net, trace, output_logit_grad(c.net, trace, w), {}, analytic);
    CHECK(norm_relative_error(analytic, fd_gradient(loss, x, 1e-5)) <= 1e-6);
  }
}

TEST_CASE("apply_update") {
  Rng rng(5);
  const auto c = random_case(rng);
  const auto gt = param_grad_target(c.net, c.batch);
  const auto gg = param_grad_gi(c.net, c.batch);

  SUBCASE("alpha = 1 is bit-identical to the plain gradient step") {
    Mlp a = c.net;
    apply_update(a, gt, gg, 0.037, 1.0);
    Mlp b = c.net;
    for (std::size_t i = 0; i < gt.size(); ++i) b.params()[i] = b.params()[i] - 0.037 * gt[i];
    CHECK(std::memcmp(a.params().data(), b.params().data(), gt.size() * sizeof(double)) == 0);
  }
  SUBCASE("opposing gradients cancel in the step but not in the contribution") {
    Mlp a = c.net;
    std::vector<double> neg(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) neg[i] = -gt[i];
    const auto stats = apply_update(a, gt, neg, 0.1, 0.5);
    CHECK(a == c.net);
    CHECK(stats.mean_abs_delta == 0.0);
    double expected = 0.0;
    for (double g : gt) expected += std::abs(0.5 * 0.1 * g) * 2.0;
    CHECK(stats.mean_abs_contribution == doctest::Approx(expected / gt.size()));
  }
  SUBCASE("zero learning rate leaves parameters unchanged") {
    Mlp a = c.net;
    const auto stats = apply_update(a, gt, gg, 0.0, 0.3);
    CHECK(a == c.net);
    CHECK(stats.mean_abs_delta == 0.0);
  }
  SUBCASE("alpha outside [0, 1]") {
    Mlp a = c.net;
    try {
      apply_update(a, gt, gg, 0.1, 1.5);
      FAIL("expected BadAlpha");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadAlpha);
    }
    CHECK_THROWS_AS(apply_update(a, gt, std::vector<double>(3), 0.1, 0.5), Error);
  }
}

TEST_CASE("combined update magnitude dominates the target-only magnitude") {
  // Recorded trace of GI updates: sum of |contributions| >= alpha-weighted
  // target-only magnitude, strictly once the GI gradient is non-zero.
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = random_case(rng);
    const double eta = 0.05;
    const double alpha = rng.uniform01();
    for (int step = 0; step < 5; ++step) {
      const auto gt = param_grad_target(c.net, c.batch);
      const auto gg = param_grad_gi(c.net, c.batch);
      double target_only = 0.0;
      double gi_abs = 0.0;
      for (std::size_t i = 0; i < gt.size(); ++i) {
        target_only += std::abs(eta * gt[i]);
        gi_abs += std::abs(gg[i]);
      }
      target_only /= gt.size();
      const auto stats = apply_update(c.net, gt, gg, eta, alpha);
      CHECK(stats.mean_abs_contribution >= alpha * target_only);
      if (gi_abs > 0.0 && alpha < 1.0) CHECK(stats.mean_abs_contribution > alpha * target_only);
      CHECK(stats.mean_abs_contribution >= stats.mean_abs_delta * (1 - 1e-12));
    }
  }
}

TEST_CASE("text serialisation is bit-exact") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_case(rng);
    c.net.params()[0] = -0.0;
    c.net.params()[c.net.parameter_count() - 1] = 5e-324;
    std::stringstream ss;
    save_mlp(ss, c.net);
    const Mlp back = load_mlp(ss);
    CHECK(back.layer_sizes() == c.net.layer_sizes());
    CHECK(back.output_activation() == c.net.output_activation());
    CHECK(std::memcmp(back.params().data(), c.net.params().data(),
                      c.net.parameter_count() * sizeof(double)) == 0);
  }
  std::stringstream header_only("mlp v1 2 3 1\n");
  CHECK_THROWS_AS(load_mlp(header_only), Error);
  std::stringstream wrong("net v2 1 1\n");
  CHECK_THROWS_AS(load_mlp(wrong), Error);
}
