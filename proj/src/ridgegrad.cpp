#include "gradlore/ridgegrad.hpp"

#include "gradlore/csv.hpp"
#include "gradlore/error.hpp"
#include "gradlore/numerics/linalg.hpp"
#include "gradlore/parallel.hpp"
#include "gradlore/trainer.hpp"

#include <cmath>
#include <ostream>

namespace gradlore {

RbfBasis RbfBasis::evenly_spaced(std::size_t count, double lo, double hi, double width) {
  if (count == 0) throw Error(ErrorCode::BadParams, "RbfBasis: need at least one centre");
  RbfBasis b;
  b.width = width;
  b.centres.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    b.centres[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  b.validate();
  return b;
}

void RbfBasis::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) throw Error(ErrorCode::BadWidth, "RbfBasis: width must be > 0");
  for (std::size_t i = 1; i < centres.size(); ++i)
    if (!(centres[i] > centres[i - 1]))
      throw Error(ErrorCode::BadParams, "RbfBasis: centres must be strictly increasing");
}

Matrix rbf_design(std::span<const double> x, const RbfBasis& basis) {
  basis.validate();
  const double r2 = basis.width * basis.width;
  Matrix phi(x.size(), basis.columns());
  for (std::size_t n = 0; n < x.size(); ++n) {
    phi(n, 0) = 1.0;
    for (std::size_t i = 0; i < basis.centres.size(); ++i) {
      const double d = x[n] - basis.centres[i];
      phi(n, i + 1) = std::exp(-d * d / r2);
    }
  }
  return phi;
}

Matrix rbf_deriv_design(std::span<const double> x, const RbfBasis& basis, bool intercept) {
  basis.validate();
  const double r2 = basis.width * basis.width;
  Matrix phi(x.size(), basis.columns());
  for (std::size_t n = 0; n < x.size(); ++n) {
    phi(n, 0) = intercept ? 1.0 : 0.0;
    for (std::size_t i = 0; i < basis.centres.size(); ++i) {
      const double d = x[n] - basis.centres[i];
      phi(n, i + 1) = -2.0 * d / r2 * std::exp(-d * d / r2);
    }
  }
  return phi;
}

namespace {

void check_lambda(double lambda, const char* what) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::BadParams, std::string(what) + ": penalty must be finite and >= 0");
}

void check_rows(const Matrix& phi, std::size_t n, const char* what) {
  if (phi.rows() != n) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": target length differs from rows");
}

}  // namespace

std::vector<double> fit_ridge(const Matrix& phi, std::span<const double> z, double lambda) {
  return fit_ridge_gradients(phi, z, std::vector<double>(phi.cols(), 0.0), lambda, 0.0);
}

std::vector<double> fit_beta_grad(const Matrix& dphi, std::span<const double> g, double lambda) {
  return fit_ridge(dphi, g, lambda);
}

std::vector<double> fit_ridge_gradients(const Matrix& phi, std::span<const double> z,
                                        std::span<const double> beta_grad, double lambda1,
                                        double lambda2) {
  check_lambda(lambda1, "fit_ridge_gradients");
  check_lambda(lambda2, "fit_ridge_gradients");
  check_rows(phi, z.size(), "fit_ridge_gradients");
  if (beta_grad.size() != phi.cols())
    throw Error(ErrorCode::ShapeMismatch, "fit_ridge_gradients: beta_grad length differs from columns");
  Matrix a = gram(phi);
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += lambda1 + lambda2;
  std::vector<double> rhs = matvec_t(phi, z);
  if (lambda2 != 0.0)
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += lambda2 * beta_grad[i];
  return solve_spd(a, rhs);
}

double rg_objective(const Matrix& phi, std::span<const double> z, std::span<const double> beta,
                    std::span<const double> beta_grad, double lambda1, double lambda2) {
  check_rows(phi, z.size(), "rg_objective");
  if (beta.size() != phi.cols() || beta_grad.size() != phi.cols())
    throw Error(ErrorCode::ShapeMismatch, "rg_objective: coefficient length differs from columns");
  const auto fit = matvec(phi, beta);
  double obj = 0.0;
  for (std::size_t n = 0; n < z.size(); ++n) obj += (z[n] - fit[n]) * (z[n] - fit[n]);
  for (std::size_t i = 0; i < beta.size(); ++i) {
    obj += lambda1 * beta[i] * beta[i];
    obj += lambda2 * (beta[i] - beta_grad[i]) * (beta[i] - beta_grad[i]);
  }
  return obj;
}

RbfBasis SineSetup::basis() const { return RbfBasis::evenly_spaced(centres, lo, hi, width); }

SineSample SineSetup::draw(std::size_t n, Rng& rng) const {
  SineSample s;
  s.x.resize(n);
  s.z.resize(n);
  s.g.resize(n);
  for (auto& v : s.x) v = rng.uniform(lo, hi);
  for (std::size_t i = 0; i < n; ++i) s.z[i] = std::sin(s.x[i]) + (noise > 0.0 ? noise * rng.normal() : 0.0);
  for (std::size_t i = 0; i < n; ++i) s.g[i] = std::cos(s.x[i]) + (noise > 0.0 ? noise * rng.normal() : 0.0);
  return s;
}

SineSample SineSetup::test_grid() const {
  SineSample s;
  for (std::size_t i = 0; i < test_points; ++i) {
    const double x = test_points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(test_points - 1);
    s.x.push_back(x);
    s.z.push_back(std::sin(x));
    s.g.push_back(std::cos(x));
  }
  return s;
}

void Fig4Config::validate() const {
  if (train_size == 0 || draws == 0) throw Error(ErrorCode::BadParams, "fig4: train_size and draws must be >= 1");
  if (setup.test_points < 2) throw Error(ErrorCode::BadParams, "fig4: need at least two test points");
  if (!(setup.noise >= 0.0)) throw Error(ErrorCode::BadParams, "fig4: noise must be >= 0");
  check_lambda(lambda1, "fig4");
  check_lambda(lambda2, "fig4");
  check_lambda(lambda_grad, "fig4");
  setup.basis();
}

namespace {

struct Fig4Fit {
  std::vector<double> ridge, grad, rg;
};

Fig4Fit fit_fig4(const Fig4Config& cfg, const RbfBasis& basis, const SineSample& s) {
  const Matrix phi = rbf_design(s.x, basis);
  const Matrix dphi = rbf_deriv_design(s.x, basis, cfg.setup.deriv_intercept);
  Fig4Fit f;
  f.ridge = fit_ridge(phi, s.z, cfg.lambda1);
  f.grad = fit_beta_grad(dphi, s.g, cfg.lambda_grad);
  f.rg = fit_ridge_gradients(phi, s.z, f.grad, cfg.lambda1, cfg.lambda2);
  return f;
}

Rng draw_rng(std::uint64_t seed, std::uint64_t index) { return Rng::derive(seed, 0x4000 + index); }

}  // namespace

Fig4Result run_fig4(const Fig4Config& cfg) {
  cfg.validate();
  const RbfBasis basis = cfg.setup.basis();
  const SineSample test = cfg.setup.test_grid();
  const Matrix phi_t = rbf_design(test.x, basis);
  const Matrix dphi_t = rbf_deriv_design(test.x, basis, cfg.setup.deriv_intercept);

  Fig4Result out;
  out.draws.reserve(cfg.draws);
  for (std::size_t d = 0; d < cfg.draws; ++d) {
    Rng rng = draw_rng(cfg.seed, d);
    const auto f = fit_fig4(cfg, basis, cfg.setup.draw(cfg.train_size, rng));
    Fig4Draw r;
    r.rmse_ridge = rmse(matvec(phi_t, f.ridge), test.z);
    r.rmse_rg = rmse(matvec(phi_t, f.rg), test.z);
    // Both derivative models read through the same derivative design.
    r.grad_rmse_ridge = rmse(matvec(dphi_t, f.ridge), test.g);
    r.grad_rmse_grad = rmse(matvec(dphi_t, f.grad), test.g);
    out.mean.rmse_ridge += r.rmse_ridge;
    out.mean.rmse_rg += r.rmse_rg;
    out.mean.grad_rmse_ridge += r.grad_rmse_ridge;
    out.mean.grad_rmse_grad += r.grad_rmse_grad;
    out.draws.push_back(r);
  }
  const double inv = 1.0 / static_cast<double>(cfg.draws);
  out.mean.rmse_ridge *= inv;
  out.mean.rmse_rg *= inv;
  out.mean.grad_rmse_ridge *= inv;
  out.mean.grad_rmse_grad *= inv;

  double mean = 0.0;
  for (double v : test.z) mean += v;
  mean /= static_cast<double>(test.z.size());
  double ss = 0.0;
  for (double v : test.z) ss += (v - mean) * (v - mean);
  out.test_std = std::sqrt(ss / static_cast<double>(test.z.size()));
  return out;
}

void write_fig4_predictions(std::ostream& os, const Fig4Config& cfg, std::uint64_t draw_index) {
  cfg.validate();
  const RbfBasis basis = cfg.setup.basis();
  Rng rng = draw_rng(cfg.seed, draw_index);
  const auto f = fit_fig4(cfg, basis, cfg.setup.draw(cfg.train_size, rng));
  const SineSample test = cfg.setup.test_grid();
  const Matrix phi_t = rbf_design(test.x, basis);
  const auto zr = matvec(phi_t, f.ridge);
  const auto zg = matvec(phi_t, f.rg);
  os << "x,z_true,z_ridge,z_rg\n";
  for (std::size_t i = 0; i < test.x.size(); ++i)
    os << csv::format(test.x[i]) << ',' << csv::format(test.z[i]) << ',' << csv::format(zr[i]) << ','
       << csv::format(zg[i]) << '\n';
}

std::vector<std::size_t> RgExperimentConfig::default_sizes() {
  std::vector<std::size_t> s;
  for (std::size_t n = 10; n <= 50; n += 2) s.push_back(n);
  return s;
}

std::vector<double> RgExperimentConfig::log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi >= lo) || points == 0) throw Error(ErrorCode::BadParams, "log_grid: need 0 < lo <= hi");
  std::vector<double> g(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = points == 1 ? lo : std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  return g;
}

void RgExperimentConfig::validate() const {
  if (sizes.empty() || trials == 0) throw Error(ErrorCode::BadParams, "rg: need sizes and trials >= 1");
  if (lambda_grid.empty()) throw Error(ErrorCode::BadParams, "rg: lambda_grid is empty");
  for (double l : lambda_grid) check_lambda(l, "rg");
  for (double l : lambda2_grid) check_lambda(l, "rg");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw Error(ErrorCode::BadParams, "rg: validation_fraction must lie in (0, 1)");
  for (auto n : sizes) {
    const auto nv = static_cast<std::size_t>(std::lround(validation_fraction * static_cast<double>(n)));
    if (nv < 1 || nv >= n) throw Error(ErrorCode::BadParams, "rg: size too small for a validation split");
  }
  if (!(setup.noise >= 0.0)) throw Error(ErrorCode::BadParams, "rg: noise must be >= 0");
  setup.basis();
}

namespace {

double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

RgTrial run_trial(const RgExperimentConfig& cfg, const RbfBasis& basis, const Matrix& phi_test,
                  const SineSample& test, std::size_t size, std::size_t trial) {
  Rng rng = Rng::derive(cfg.seed, (static_cast<std::uint64_t>(size) << 32) | trial);
  const SineSample s = cfg.setup.draw(size, rng);
  const auto nv = static_cast<std::size_t>(std::lround(cfg.validation_fraction * static_cast<double>(size)));
  const std::span<const double> xv(s.x.data(), nv), zv(s.z.data(), nv), gv(s.g.data(), nv);
  const std::span<const double> xt(s.x.data() + nv, size - nv), zt(s.z.data() + nv, size - nv),
      gt(s.g.data() + nv, size - nv);

  const Matrix phi = rbf_design(xt, basis), phi_v = rbf_design(xv, basis);
  const Matrix dphi = rbf_deriv_design(xt, basis, cfg.setup.deriv_intercept);
  const Matrix dphi_v = rbf_deriv_design(xv, basis, cfg.setup.deriv_intercept);
  const auto& grid2 = cfg.lambda2_grid.empty() ? cfg.lambda_grid : cfg.lambda2_grid;

  RgTrial r;
  r.size = size;
  r.trial = trial;
  double best = INFINITY;
  std::vector<double> beta_ridge;
  for (double l : cfg.lambda_grid) {
    auto b = fit_ridge(phi, zt, l);
    const double e = mse(matvec(phi_v, b), zv);
    if (e < best) best = e, r.lambda_ridge = l, beta_ridge = std::move(b);
  }
  best = INFINITY;
  std::vector<double> beta_grad;
  for (double l : cfg.lambda_grid) {
    auto b = fit_beta_grad(dphi, gt, l);
    const double e = mse(matvec(dphi_v, b), gv);
    if (e < best) best = e, r.lambda_grad = l, beta_grad = std::move(b);
  }
  best = INFINITY;
  std::vector<double> beta_rg;
  for (double l1 : cfg.lambda_grid) {
    for (double l2 : grid2) {
      auto b = fit_ridge_gradients(phi, zt, beta_grad, l1, l2);
      const double e = mse(matvec(phi_v, b), zv);
      if (e < best) best = e, r.lambda1 = l1, r.lambda2 = l2, beta_rg = std::move(b);
    }
  }
  r.rmse_ridge = rmse(matvec(phi_test, beta_ridge), test.z);
  r.rmse_rg = rmse(matvec(phi_test, beta_rg), test.z);
  r.pct_diff = 100.0 * (r.rmse_ridge - r.rmse_rg) / r.rmse_ridge;
  return r;
}

}  // namespace

std::vector<RgTrial> rg_experiment(const RgExperimentConfig& cfg, std::size_t jobs) {
  cfg.validate();
  const RbfBasis basis = cfg.setup.basis();
  const SineSample test = cfg.setup.test_grid();
  const Matrix phi_test = rbf_design(test.x, basis);
  std::vector<RgTrial> out(cfg.sizes.size() * cfg.trials);
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    out[i] = run_trial(cfg, basis, phi_test, test, cfg.sizes[i / cfg.trials], i % cfg.trials);
  });
  return out;
}

double mean_pct_diff(const std::vector<RgTrial>& trials) {
  if (trials.empty()) throw Error(ErrorCode::Empty, "mean_pct_diff: no trials");
  double s = 0.0;
  for (const auto& t : trials) s += t.pct_diff;
  return s / static_cast<double>(trials.size());
}

void write_rg_results_csv(std::ostream& os, const std::vector<RgTrial>& trials) {
  os << "size,trial,rmse_ridge,rmse_rg,pct_diff\n";
  for (const auto& t : trials)
    os << t.size << ',' << t.trial << ',' << csv::format(t.rmse_ridge) << ',' << csv::format(t.rmse_rg) << ','
       << csv::format(t.pct_diff) << '\n';
}

}  // namespace gradlore
