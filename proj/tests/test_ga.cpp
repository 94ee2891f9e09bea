#include "doctest.h"

#include "gradlore/error.hpp"
#include "gradlore/ga.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace gradlore;

namespace {

GaConfig tiny() {
  GaConfig cfg;
  cfg.base.train_sizes = {12};
  cfg.base.hidden_layers = 1;
  cfg.base.epochs = 3;
  cfg.base.test_size = 20;
  cfg.multipliers = {1, 2, 3, 4, 5, 6};
  cfg.learning_rates = {0.01, 0.02};
  cfg.population = 6;
  cfg.generations = 3;
  cfg.seed = 9;
  return cfg;
}

std::size_t trained(const GaResult& r) {
  std::size_t n = 0;
  for (const auto& e : r.audit) n += (!e.pruned && !e.cached);
  return n;
}

}  // namespace

TEST_CASE("two candidates, one generation") {
  auto cfg = tiny();
  cfg.population = 2;
  cfg.generations = 1;
  cfg.elites = 0;
  cfg.prune = false;
  const auto r = ga_optimize(cfg);
  REQUIRE(r.audit.size() == 2);
  const auto& a = r.audit[0];
  const auto& b = r.audit[1];
  CHECK(r.best_fitness == std::min(a.fitness, b.fitness));
  CHECK(r.best == (b.fitness < a.fitness ? b.genome : a.genome));
}

TEST_CASE("a bound no candidate reaches changes nothing") {
  auto cfg = tiny();
  cfg.prune = false;
  const auto off = ga_optimize(cfg);
  cfg.prune = true;
  cfg.c_upper_override = 1000;
  const auto on = ga_optimize(cfg);
  REQUIRE(off.audit.size() == on.audit.size());
  for (std::size_t i = 0; i < off.audit.size(); ++i) {
    CHECK(off.audit[i].genome == on.audit[i].genome);
    CHECK(off.audit[i].fitness == on.audit[i].fitness);
    CHECK_FALSE(on.audit[i].pruned);
  }
  CHECK(off.best == on.best);
  CHECK(off.training_invocations == on.training_invocations);
}

TEST_CASE("pruning skips oversized candidates") {
  auto cfg = tiny();
  cfg.prune = false;
  const auto off = ga_optimize(cfg);
  cfg.prune = true;
  cfg.c_upper_override = 8;
  const auto on = ga_optimize(cfg);
  std::size_t pruned = 0;
  for (const auto& e : on.audit) {
    if (e.pruned) {
      ++pruned;
      CHECK(e.complexity > 8);
      CHECK(std::isinf(e.fitness));
    } else {
      CHECK(e.complexity <= 8);
      CHECK(std::isfinite(e.fitness));
    }
  }
  CHECK(pruned > 0);
  CHECK(on.best_complexity <= 8);
  CHECK(on.training_invocations == trained(on));
  CHECK(off.training_invocations == trained(off));
  CHECK(on.training_invocations < off.training_invocations);
}

TEST_CASE("estimation phase sets the bound from a coarse sweep") {
  auto cfg = tiny();
  cfg.estimation_points = 3;
  cfg.estimation_seeds = 2;
  const auto r = ga_optimize(cfg, 2);
  REQUIRE(r.c_upper.has_value());
  CHECK(r.estimation_invocations == 2 * 3 * 2);
  CHECK(r.training_invocations == r.estimation_invocations + trained(r));
  // Coarse grid over 1..6 picks multipliers 1, 4, 6 (widths 4, 16, 24).
  CHECK((*r.c_upper == 4 || *r.c_upper == 16 || *r.c_upper == 24));
  for (const auto& e : r.audit)
    if (!e.pruned) CHECK(e.complexity <= *r.c_upper);

  const auto again = ga_optimize(cfg, 1);
  CHECK(again.c_upper == r.c_upper);
  CHECK(again.best == r.best);
  CHECK(again.best_fitness == r.best_fitness);
}

TEST_CASE("audit log is one JSON object per candidate") {
  auto cfg = tiny();
  cfg.c_upper_override = 8;
  const auto r = ga_optimize(cfg);
  std::ostringstream os;
  write_ga_audit_jsonl(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto& e = r.audit[lines];
    CHECK(j.at("genes").at("complexity").get<std::size_t>() == e.complexity);
    CHECK(j.at("pruned").get<bool>() == e.pruned);
    if (e.pruned) {
      CHECK(j.at("fitness").is_null());
    } else {
      CHECK(j.at("fitness").get<double>() == e.fitness);
    }
    ++lines;
  }
  CHECK(lines == r.audit.size());
  CHECK(lines == cfg.population * cfg.generations);
}

TEST_CASE("invalid GA configuration") {
  auto cfg = tiny();
  cfg.population = 1;
  CHECK_THROWS_AS(ga_optimize(cfg), Error);
  cfg = tiny();
  cfg.mutation_rate = 1.5;
  CHECK_THROWS_AS(ga_optimize(cfg), Error);
  cfg = tiny();
  cfg.elites = cfg.population;
  CHECK_THROWS_AS(ga_optimize(cfg), Error);
  cfg = tiny();
  cfg.learning_rates.clear();
  CHECK_THROWS_AS(ga_optimize(cfg), Error);
}
