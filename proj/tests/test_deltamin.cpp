#include "doctest.h"

#include "gradlore/deltamin.hpp"
#include "gradlore/error.hpp"

#include <cmath>
#include <sstream>

using namespace gradlore;

namespace {

SweepResult rows_of(std::vector<SweepRow> rows, AccuracyMeasure m = AccuracyMeasure::rmse) {
  SweepResult r;
  r.train_size = 10;
  r.seeds = 1;
  r.measure = m;
  r.rows = std::move(rows);
  return r;
}

SweepConfig tiny_config() {
  SweepConfig cfg;
  cfg.train_sizes = {12, 20};
  cfg.multipliers = {1, 2};
  cfg.hidden_layers = 2;
  cfg.seeds = 2;
  cfg.test_size = 30;
  cfg.epochs = 5;
  return cfg;
}

}  // namespace

TEST_CASE("delta_min picks the smallest gap") {
  const auto r = rows_of({{8, 1.0, 1.5}, {16, 1.0, 1.2}, {24, 1.0, 0.7}});
  const auto d = delta_min(r);
  CHECK(d.c_upper == 16);
  CHECK(d.delta == std::abs(1.2 - 1.0));

  const auto tie = rows_of({{4, 0.3, 0.3}, {8, 0.2, 0.2}, {12, 0.1, 0.1}});
  CHECK(delta_min(tie).c_upper == 4);
  CHECK(delta_min(tie).delta == 0.0);

  try {
    delta_min(rows_of({{4, 0.3, 0.3}}));
    FAIL("expected TooFewRows");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewRows);
  }
  CHECK_THROWS_AS(delta_min(rows_of({{8, 1, 1}, {8, 1, 1}})), Error);
}

TEST_CASE("delta equals the minimum absolute gap exactly") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<SweepRow> rows;
    std::size_t c = 0;
    double smallest = INFINITY;
    for (std::size_t i = 0; i < 2 + rng.below(10); ++i) {
      c += 1 + rng.below(5);
      rows.push_back({c, rng.uniform01(), rng.uniform01()});
      smallest = std::min(smallest, std::abs(rows.back().a_gi - rows.back().a_conv));
    }
    CHECK(delta_min(rows_of(rows)).delta == smallest);
  }
}

TEST_CASE("optimal complexity") {
  CHECK(optimal_complexity(rows_of({{4, 0.9, 0}, {8, 0.5, 0}, {12, 0.2, 0}})) == 12);
  CHECK(optimal_complexity(rows_of({{6, 0.9, 0}})) == 6);
  CHECK(optimal_complexity(rows_of({{4, 0.5, 0}, {8, 0.5, 0}})) == 4);
  // Correlation: higher is better.
  CHECK(optimal_complexity(rows_of({{4, 0.9, 0}, {8, 0.5, 0}}, AccuracyMeasure::pearson)) == 4);
  CHECK_THROWS_AS(optimal_complexity(rows_of({})), Error);
}

TEST_CASE("assumption diagnostics") {
  // RMSE falls with shrinking steps, GI better and flatter up to c* = 16.
  const auto r = rows_of({{4, 1.0, 0.6}, {8, 0.6, 0.4}, {12, 0.4, 0.3}, {16, 0.35, 0.32}, {20, 0.36, 0.36}});
  const auto a = check_assumptions(r);
  CHECK(a.monotone_slope_cases == 3);
  CHECK(a.monotone_slope == 1.0);
  CHECK(a.gi_better_cases == 4);
  CHECK(a.gi_better == 1.0);
  CHECK(a.gi_slope_cases == 3);
  CHECK(a.gi_slope == 1.0);

  // Same curves seen as correlations (sign flipped) give the same verdicts.
  std::vector<SweepRow> flipped;
  for (const auto& row : r.rows) flipped.push_back({row.complexity, -row.a_conv, -row.a_gi});
  const auto b = check_assumptions(rows_of(flipped, AccuracyMeasure::pearson));
  CHECK(b.monotone_slope == 1.0);
  CHECK(b.gi_better == 1.0);
  CHECK(b.gi_slope == 1.0);

  const auto one = check_assumptions(rows_of({{4, 1.0, 0.5}}));
  CHECK(std::isnan(one.monotone_slope));
  CHECK(one.gi_better == 1.0);
  CHECK(std::isnan(one.gi_slope));
}

TEST_CASE("accuracy measure names") {
  CHECK(parse_accuracy_measure("pearson") == AccuracyMeasure::pearson);
  CHECK(to_string(AccuracyMeasure::rmse) == "rmse");
  CHECK(lower_is_better(AccuracyMeasure::rmse));
  CHECK_FALSE(lower_is_better(AccuracyMeasure::pearson));
  CHECK_THROWS_AS(parse_accuracy_measure("mae"), Error);
}

TEST_CASE("sweep") {
  auto cfg = tiny_config();
  const auto a = sweep(cfg, 1);
  const auto b = sweep(cfg, 4);
  REQUIRE(a.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(a[s].train_size == cfg.train_sizes[s]);
    REQUIRE(a[s].rows.size() == 2);
    CHECK(a[s].rows[0].complexity == 4);
    CHECK(a[s].rows[1].complexity == 8);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::isfinite(a[s].rows[i].a_conv));
      CHECK(std::isfinite(a[s].rows[i].a_gi));
      CHECK(a[s].rows[i].a_conv == b[s].rows[i].a_conv);
      CHECK(a[s].rows[i].a_gi == b[s].rows[i].a_gi);
    }
  }

  cfg.multipliers = {3};
  cfg.train_sizes = {12};
  cfg.seeds = 1;
  const auto single = sweep(cfg);
  CHECK(single[0].rows.size() == 1);
  CHECK(optimal_complexity(single[0]) == 12);

  cfg.measure = AccuracyMeasure::pearson;
  const auto p = sweep(cfg);
  CHECK(p[0].rows[0].a_conv <= 1.0);
  CHECK(p[0].rows[0].a_conv >= -1.0);

  std::ostringstream os;
  write_sweep_csv(os, a);
  CHECK(os.str().rfind("size,complexity,a_conv,a_gi,abs_delta\n12,4,", 0) == 0);

  cfg.multipliers = {2, 2};
  CHECK_THROWS_AS(sweep(cfg), Error);
}

TEST_CASE("seed data uses nested prefixes and standardised inputs") {
  auto cfg = tiny_config();
  const auto d = make_seed_data(cfg, 3);
  CHECK(d.pool.size() == 20);
  CHECK(d.test.size() == 30);
  const auto small = d.train_prefix(12);
  for (std::size_t i = 0; i < 12; ++i) CHECK(small.inputs(i, 0) == d.pool.inputs(i, 0));
  for (double v : d.pool.inputs.data()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(d.train_prefix(21), Error);
}
