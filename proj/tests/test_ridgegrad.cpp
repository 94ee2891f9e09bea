#include "doctest.h"

#include "gradlore/error.hpp"
#include "gradlore/numerics/fd.hpp"
#include "gradlore/ridgegrad.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace gradlore;

namespace {

// Written out by hand, independent of rg_objective.
double objective(const Matrix& phi, const std::vector<double>& z, const std::vector<double>& b,
                 const std::vector<double>& bg, double l1, double l2) {
  double s = 0.0;
  for (std::size_t n = 0; n < phi.rows(); ++n) {
    double fit = 0.0;
    for (std::size_t j = 0; j < phi.cols(); ++j) fit += phi(n, j) * b[j];
    s += (z[n] - fit) * (z[n] - fit);
  }
  for (std::size_t j = 0; j < b.size(); ++j) s += l1 * b[j] * b[j] + l2 * (b[j] - bg[j]) * (b[j] - bg[j]);
  return s;
}

double max_scaled_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, m = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
    m = std::max({m, std::abs(a[i]), std::abs(b[i])});
  }
  return d / m;
}

const RbfBasis kFig4Basis = RbfBasis::evenly_spaced(7, 0.0, 2 * std::numbers::pi, 1.0);

}  // namespace

TEST_CASE("rbf design") {
  const std::vector<double> x{kFig4Basis.centres[2], 100.0};
  const Matrix phi = rbf_design(x, kFig4Basis);
  CHECK(phi.rows() == 2);
  CHECK(phi.cols() == 8);
  CHECK(phi(0, 0) == 1.0);
  CHECK(phi(0, 3) == 1.0);
  CHECK(phi(1, 0) == 1.0);
  for (std::size_t j = 1; j < 8; ++j) CHECK(phi(1, j) < 1e-300);

  Rng rng(1);
  std::vector<double> xs(12);
  for (auto& v : xs) v = rng.uniform(0.0, 2 * std::numbers::pi);
  const Matrix p12 = rbf_design(xs, kFig4Basis);
  CHECK(p12.rows() == 12);
  CHECK(p12.cols() == 8);

  RbfBasis bad = kFig4Basis;
  bad.width = 0.0;
  try {
    rbf_design(x, bad);
    FAIL("expected BadWidth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadWidth);
  }
  CHECK_THROWS_AS(rbf_deriv_design(x, bad), Error);
}

TEST_CASE("rbf derivative design") {
  const double c = kFig4Basis.centres[4];
  const std::vector<double> at{c};
  CHECK(rbf_deriv_design(at, kFig4Basis)(0, 5) == 0.0);
  CHECK(rbf_deriv_design(at, kFig4Basis)(0, 0) == 1.0);
  CHECK(rbf_deriv_design(at, kFig4Basis, false)(0, 0) == 0.0);

  const std::vector<double> pair{c + 0.37, c - 0.37};
  const Matrix d = rbf_deriv_design(pair, kFig4Basis);
  CHECK(d(0, 5) == -d(1, 5));

  // Each column against central differences of the design itself.
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const double x0 = rng.uniform(-1.0, 7.5);
    const std::vector<double> x{x0};
    auto f = [](std::span<const double> v) {
      const Matrix p = rbf_design(v, kFig4Basis);
      return std::vector<double>(p.data().begin(), p.data().end());
    };
    const Matrix fd = fd_jacobian(f, x);
    const Matrix an = rbf_deriv_design(x, kFig4Basis);
    for (std::size_t j = 1; j < 8; ++j) CHECK(std::abs(fd(j, 0) - an(0, j)) < 1e-7);
  }
}

TEST_CASE("fit_ridge") {
  SUBCASE("square invertible system interpolates") {
    const Matrix phi{{2.0, 1.0, 0.0}, {1.0, 3.0, 1.0}, {0.0, 1.0, 4.0}};
    const std::vector<double> z{1.0, -2.0, 0.5};
    const auto b = fit_ridge(phi, z, 0.0);
    const auto fit = matvec(phi, b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(fit[i] == doctest::Approx(z[i]).epsilon(1e-12));
  }
  SUBCASE("huge penalty shrinks to zero") {
    Rng rng(3);
    const SineSetup setup;
    const auto s = setup.draw(12, rng);
    const auto b = fit_ridge(rbf_design(s.x, kFig4Basis), s.z, 1e12);
    for (double v : b) CHECK(std::abs(v) < 1e-9);
  }
  SUBCASE("matches a numeric minimiser on the 12-sample sine setup") {
    Rng rng(4);
    const SineSetup setup;
    const auto s = setup.draw(12, rng);
    const Matrix phi = rbf_design(s.x, kFig4Basis);
    const auto b = fit_ridge(phi, s.z, 0.1);
    const std::vector<double> zero(8, 0.0);
    const auto ref = oracle::numeric_minimise(
        [&](const std::vector<double>& v) { return objective(phi, s.z, v, zero, 0.1, 0.0); }, zero);
    CHECK(max_scaled_diff(b, ref) < 1e-8);
  }
  SUBCASE("rank deficient without penalty") {
    const std::vector<double> x{1.0, 1.0};
    try {
      fit_ridge(rbf_design(x, kFig4Basis), std::vector<double>{0.0, 0.0}, 0.0);
      FAIL("expected NotSpd");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotSpd);
    }
  }
  CHECK_THROWS_AS(fit_ridge(Matrix{{1.0}}, std::vector<double>{1.0, 2.0}, 0.1), Error);
  CHECK_THROWS_AS(fit_ridge(Matrix{{1.0}}, std::vector<double>{1.0}, -1.0), Error);
}

TEST_CASE("fit_beta_grad") {
  Rng rng(5);
  std::vector<double> x(20);
  for (auto& v : x) v = rng.uniform(0.0, 2 * std::numbers::pi);
  const Matrix dphi = rbf_deriv_design(x, kFig4Basis);
  std::vector<double> beta(8);
  for (auto& v : beta) v = rng.normal();
  const auto g = matvec(dphi, beta);
  const auto rec = fit_beta_grad(dphi, g, 0.0);
  CHECK(max_scaled_diff(rec, beta) < 1e-8);

  const auto zero = fit_beta_grad(dphi, std::vector<double>(20, 0.0), 0.5);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("fit_ridge_gradients closed form") {
  Rng rng(6);
  const SineSetup setup;
  const auto s = setup.draw(12, rng);
  const Matrix phi = rbf_design(s.x, kFig4Basis);
  const auto bg = fit_beta_grad(rbf_deriv_design(s.x, kFig4Basis), s.g, 0.1);

  // lambda2 = 0 is the ridge system exactly.
  CHECK(fit_ridge_gradients(phi, s.z, bg, 0.1, 0.0) == fit_ridge(phi, s.z, 0.1));

  const auto big = fit_ridge_gradients(phi, s.z, bg, 0.1, 1e12);
  CHECK(max_scaled_diff(big, bg) < 1e-9);

  const auto rg = fit_ridge_gradients(phi, s.z, bg, 0.1, 0.1);
  const auto ridge = fit_ridge(phi, s.z, 0.1);
  const double at_rg = rg_objective(phi, s.z, rg, bg, 0.1, 0.1);
  CHECK(at_rg <= rg_objective(phi, s.z, ridge, bg, 0.1, 0.1));
  CHECK(at_rg <= rg_objective(phi, s.z, bg, bg, 0.1, 0.1));
  CHECK(at_rg == doctest::Approx(objective(phi, s.z, rg, bg, 0.1, 0.1)).epsilon(1e-12));

  CHECK_THROWS_AS(fit_ridge_gradients(phi, s.z, std::vector<double>(3), 0.1, 0.1), Error);
}

TEST_CASE("closed form equals a numeric minimiser on random instances") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 6 + rng.below(15);
    const std::size_t centres = 2 + rng.below(7);
    const RbfBasis basis = RbfBasis::evenly_spaced(centres, 0.0, 2 * std::numbers::pi, rng.uniform(0.5, 2.0));
    std::vector<double> x(n), z(n), bg(centres + 1);
    for (auto& v : x) v = rng.uniform(0.0, 2 * std::numbers::pi);
    for (auto& v : z) v = rng.normal();
    for (auto& v : bg) v = rng.normal();
    const double l1 = rng.uniform(0.01, 1.0);
    const double l2 = rng.below(4) == 0 ? 0.0 : rng.uniform(0.01, 1.0);
    const Matrix phi = rbf_design(x, basis);
    const auto closed = fit_ridge_gradients(phi, z, bg, l1, l2);
    const auto numeric = oracle::numeric_minimise(
        [&](const std::vector<double>& v) { return objective(phi, z, v, bg, l1, l2); },
        std::vector<double>(centres + 1, 0.0));
    CHECK(max_scaled_diff(closed, numeric) < 1e-6);
    if (l2 == 0.0) CHECK(closed == fit_ridge(phi, z, l1));
  }
}

TEST_CASE("sine setup") {
  const SineSetup setup;
  const auto grid = setup.test_grid();
  REQUIRE(grid.x.size() == 200);
  CHECK(grid.x.front() == 0.0);
  CHECK(grid.x.back() == doctest::Approx(2 * std::numbers::pi));
  // Integrating the derivative over a full period returns to the start.
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < grid.x.size(); ++i)
    integral += 0.5 * (grid.g[i] + grid.g[i + 1]) * (grid.x[i + 1] - grid.x[i]);
  CHECK(std::abs(integral) < 1e-3);

  SineSetup clean;
  clean.noise = 0.0;
  Rng rng(8);
  const auto s = clean.draw(5, rng);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(s.z[i] == std::sin(s.x[i]));
    CHECK(s.g[i] == std::cos(s.x[i]));
  }
}

TEST_CASE("rg experiment") {
  RgExperimentConfig cfg;
  cfg.sizes = {10, 20};
  cfg.trials = 4;
  cfg.lambda2_grid = {0.0};
  const auto t = rg_experiment(cfg);
  REQUIRE(t.size() == 8);
  for (const auto& r : t) {
    CHECK(r.pct_diff == 0.0);
    CHECK(r.lambda2 == 0.0);
  }
  CHECK(mean_pct_diff(t) == 0.0);

  cfg.lambda2_grid.clear();
  const auto a = rg_experiment(cfg, 1);
  const auto b = rg_experiment(cfg, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rmse_rg == b[i].rmse_rg);
    CHECK(a[i].rmse_ridge == b[i].rmse_ridge);
  }

  cfg.sizes = {1};
  CHECK_THROWS_AS(rg_experiment(cfg), Error);
  CHECK_THROWS_AS(mean_pct_diff({}), Error);
}
