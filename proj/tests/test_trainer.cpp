#include "doctest.h"

#include "gradlore/error.hpp"
#include "gradlore/fig1.hpp"
#include "gradlore/processes.hpp"
#include "gradlore/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

using namespace gradlore;

namespace {

struct Setup {
  Mlp net;
  GiBatch train_data;
  GiBatch test_data;
};

Setup quadratic_setup(std::uint64_t seed, std::size_t n = 40) {
  Rng data = Rng::derive(seed, 1);
  Rng init = Rng::derive(seed, 2);
  Setup s{Mlp::random({1, 8, 1}, OutputActivation::identity, init), gen_quadratic(n, data),
          gen_quadratic(50, data)};
  const double c[] = {0.0}, sc[] = {3.0};
  s.train_data = rescale_inputs(s.train_data, c, sc);
  s.test_data = rescale_inputs(s.test_data, c, sc);
  return s;
}

bool same_history(const TrainHistory& a, const TrainHistory& b) {
  if (a.epochs.size() != b.epochs.size()) return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto &x = a.epochs[i], &y = b.epochs[i];
    if (x.epoch != y.epoch || x.train_rmse != y.train_rmse || x.test_rmse != y.test_rmse ||
        x.param_delta != y.param_delta)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero epochs leaves the model untouched") {
  auto s = quadratic_setup(3);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.use_gi = true;
  const auto r = train(s.net, s.train_data, s.test_data, cfg);
  CHECK(r.history.epochs.empty());
  CHECK(r.net == s.net);
}

TEST_CASE("alpha = 1 with GI reproduces conventional training bit for bit") {
  auto s = quadratic_setup(5);
  for (std::size_t batch : {std::size_t{0}, std::size_t{7}}) {
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = batch;
    cfg.alpha = 1.0;
    cfg.seed = 11;
    cfg.use_gi = false;
    const auto plain = train(s.net, s.train_data, s.test_data, cfg);
    cfg.use_gi = true;
    const auto gi = train(s.net, s.train_data, s.test_data, cfg);
    CHECK(plain.net == gi.net);
    CHECK(same_history(plain.history, gi.history));
  }
}

TEST_CASE("history has one finite record per epoch and is reproducible") {
  auto s = quadratic_setup(8);
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.batch_size = 10;
  cfg.use_gi = true;
  cfg.seed = 4;
  const auto a = train(s.net, s.train_data, s.test_data, cfg);
  const auto b = train(s.net, s.train_data, s.test_data, cfg);
  REQUIRE(a.history.epochs.size() == 25);
  for (std::size_t i = 0; i < 25; ++i) {
    const auto& e = a.history.epochs[i];
    CHECK(e.epoch == i + 1);
    CHECK(std::isfinite(e.train_rmse));
    CHECK(std::isfinite(e.test_rmse));
    CHECK(std::isfinite(e.param_delta));
    CHECK(e.param_delta >= 0.0);
  }
  CHECK(a.net == b.net);
  CHECK(same_history(a.history, b.history));

  cfg.seed = 5;
  const auto c = train(s.net, s.train_data, s.test_data, cfg);
  CHECK_FALSE(c.net == a.net);
}

TEST_CASE("training lowers both losses") {
  auto s = quadratic_setup(9, 60);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.use_gi = true;
  const auto r = train(s.net, s.train_data, s.test_data, cfg);
  CHECK(target_loss(r.net, s.train_data) < target_loss(s.net, s.train_data));
  CHECK(gi_loss(r.net, s.train_data) < gi_loss(s.net, s.train_data));
}

TEST_CASE("invalid configuration") {
  auto s = quadratic_setup(1);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(s.net, s.train_data, s.test_data, cfg), Error);
  cfg.learning_rate = 0.01;
  cfg.alpha = 1.5;
  try {
    train(s.net, s.train_data, s.test_data, cfg);
    FAIL("expected BadAlpha");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadAlpha);
  }
}

TEST_CASE("rmse") {
  const std::vector<double> a{1.0, -2.0, 3.5};
  CHECK(rmse(a, a) == 0.0);
  const std::vector<double> z{0.0, 0.0}, t{3.0, 4.0};
  CHECK(rmse(z, t) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), Error);
  CHECK_THROWS_AS(rmse(z, a), Error);

  // Predicting the sample mean on unit-variance data gives roughly one.
  Rng rng(42);
  std::vector<double> truth(20000);
  for (double& v : truth) v = rng.normal();
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / truth.size();
  const std::vector<double> pred(truth.size(), mean);
  double ss = 0.0;
  for (double v : truth) ss += (v - mean) * (v - mean);
  const double direct = std::sqrt(ss / truth.size());
  CHECK(rmse(pred, truth) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(rmse(pred, truth) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("pearson") {
  const std::vector<double> a{0.3, -1.0, 2.0, 0.5, 4.0};
  std::vector<double> neg(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
  CHECK(pearson(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pearson(a, neg) == doctest::Approx(-1.0).epsilon(1e-14));

  // Centre a random vector, then strip its projection on a centred `a`.
  Rng rng(7);
  const std::size_t n = 64;
  std::vector<double> u(n), v(n);
  for (auto& x : u) x = rng.normal();
  for (auto& x : v) x = rng.normal();
  auto centre = [](std::vector<double>& w) {
    const double m = std::accumulate(w.begin(), w.end(), 0.0) / w.size();
    for (auto& x : w) x -= m;
  };
  centre(u);
  centre(v);
  const double uv = std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
  const double uu = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i] -= uv / uu * u[i];
  CHECK(std::abs(pearson(u, v)) < 1e-12);

  const std::vector<double> flat(5, 2.0);
  try {
    pearson(a, flat);
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVariance);
  }
}

TEST_CASE("history csv") {
  TrainHistory h;
  h.epochs.push_back({1, 0.5, 0.25, 0.125});
  std::ostringstream os;
  write_history_csv(os, h);
  CHECK(os.str() == "epoch,train_rmse,test_rmse,param_delta\n1,0.5,0.25,0.125\n");
}

TEST_CASE("fig1 harness shares data and weights between schemes") {
  Fig1Config cfg;
  cfg.train_sizes = {20, 40};
  cfg.seeds = 2;
  cfg.epochs = 15;
  cfg.test_size = 30;
  cfg.hidden = 6;
  const auto a = run_fig1(cfg, 1);
  const auto b = run_fig1(cfg, 3);
  REQUIRE(a.sizes.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    REQUIRE(a.sizes[s].runs.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(same_history(a.sizes[s].runs[k].gi, b.sizes[s].runs[k].gi));
      CHECK(same_history(a.sizes[s].runs[k].conventional, b.sizes[s].runs[k].conventional));
    }
    CHECK(a.sizes[s].mean_history(true).epochs.size() == 15);
    CHECK(std::isfinite(a.sizes[s].mean_final_test_rmse(false)));
  }

  // With alpha = 1 the two schemes coincide.
  cfg.alpha = 1.0;
  const auto c = run_fig1(cfg, 1);
  CHECK(same_history(c.sizes[0].runs[0].gi, c.sizes[0].runs[0].conventional));

  cfg.seeds = 0;
  CHECK_THROWS_AS(run_fig1(cfg), Error);
}
