#include "gradlore/ga.hpp"

#include "gradlore/error.hpp"
#include "gradlore/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace gradlore {

void GaConfig::validate() const {
  base.validate();
  if (multipliers.empty() || learning_rates.empty()) throw Error(ErrorCode::BadParams, "ga: empty gene space");
  for (auto m : multipliers)
    if (m == 0) throw Error(ErrorCode::BadWidth, "ga: multiplier must be >= 1");
  for (double lr : learning_rates)
    if (!(lr > 0.0)) throw Error(ErrorCode::BadParams, "ga: learning rates must be > 0");
  if (population < 2) throw Error(ErrorCode::BadParams, "ga: population must be >= 2");
  if (generations == 0) throw Error(ErrorCode::BadParams, "ga: generations must be >= 1");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0) || !(crossover_rate >= 0.0 && crossover_rate <= 1.0))
    throw Error(ErrorCode::BadParams, "ga: rates must lie in [0, 1]");
  if (elites >= population) throw Error(ErrorCode::BadParams, "ga: elites must be < population");
  if (prune && !c_upper_override && (estimation_points < 2 || estimation_seeds == 0))
    throw Error(ErrorCode::BadParams, "ga: estimation needs >= 2 points and >= 1 seed");
}

namespace {

std::uint64_t genome_key(const Genome& g) {
  return (static_cast<std::uint64_t>(g.multiplier) << 32) ^ static_cast<std::uint64_t>(g.learning_rate);
}

/// Coarse grid: evenly spaced picks across the sorted multiplier list.
std::vector<std::size_t> estimation_grid(const GaConfig& cfg) {
  std::vector<std::size_t> sorted = cfg.multipliers;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t points = std::min(cfg.estimation_points, sorted.size());
  std::vector<std::size_t> grid;
  for (std::size_t i = 0; i < points; ++i) {
    const std::size_t idx = points == 1 ? 0 : (i * (sorted.size() - 1) + (points - 1) / 2) / (points - 1);
    if (grid.empty() || sorted[idx] != grid.back()) grid.push_back(sorted[idx]);
  }
  return grid;
}

}  // namespace

GaResult ga_optimize(const GaConfig& cfg, std::size_t jobs) {
  cfg.validate();
  GaResult res;
  const std::size_t train_size = cfg.base.train_sizes.front();

  if (cfg.prune) {
    if (cfg.c_upper_override) {
      res.c_upper = *cfg.c_upper_override;
    } else {
      SweepConfig est = cfg.base;
      est.train_sizes = {train_size};
      est.multipliers = estimation_grid(cfg);
      est.seeds = cfg.estimation_seeds;
      est.base_seed = cfg.seed ^ 0x45535449ULL;
      const auto sweep_result = sweep(est, jobs);
      res.c_upper = delta_min(sweep_result.front()).c_upper;
      res.estimation_invocations = 2 * est.multipliers.size() * est.seeds;
      res.training_invocations += res.estimation_invocations;
    }
  }

  SweepConfig data_cfg = cfg.base;
  data_cfg.train_sizes = {train_size};
  const SeedData data = make_seed_data(data_cfg, cfg.seed);
  const GiBatch train_data = data.train_prefix(train_size);

  Rng rng = Rng::derive(cfg.seed, 0x4741);
  auto random_genome = [&] {
    Genome g;
    g.multiplier = rng.below(cfg.multipliers.size());
    g.learning_rate = rng.below(cfg.learning_rates.size());
    return g;
  };

  std::map<std::uint64_t, double> fitness_cache;
  std::vector<Genome> pop(cfg.population);
  for (auto& g : pop) g = random_genome();

  bool have_best = false;
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    // Decide what needs training, then train the distinct new genomes.
    std::vector<GaAuditEntry> entries(pop.size());
    std::vector<std::size_t> to_train;
    std::map<std::uint64_t, std::size_t> first_in_gen;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      auto& e = entries[i];
      e.generation = gen;
      e.index = i;
      e.genome = pop[i];
      e.complexity = cfg.base.complexity(cfg.multipliers[pop[i].multiplier]);
      e.learning_rate = cfg.learning_rates[pop[i].learning_rate];
      const auto key = genome_key(pop[i]);
      if (res.c_upper && e.complexity > *res.c_upper) {
        e.pruned = true;
        e.fitness = std::numeric_limits<double>::infinity();
      } else if (auto it = fitness_cache.find(key); it != fitness_cache.end()) {
        e.cached = true;
        e.fitness = it->second;
      } else if (first_in_gen.count(key)) {
        e.cached = true;
      } else {
        first_in_gen[key] = i;
        to_train.push_back(i);
      }
    }
    parallel_for(to_train.size(), jobs, [&](std::size_t t) {
      auto& e = entries[to_train[t]];
      const std::uint64_t eval_seed = Rng::derive(cfg.seed, genome_key(e.genome)).next_u64();
      e.fitness = train_pair(cfg.base, train_data, data.test, e.complexity, e.learning_rate, eval_seed, false).a_conv;
    });
    res.training_invocations += to_train.size();
    for (auto i : to_train) fitness_cache[genome_key(entries[i].genome)] = entries[i].fitness;
    for (auto& e : entries)
      if (e.cached && !e.pruned) e.fitness = fitness_cache.at(genome_key(e.genome));

    for (const auto& e : entries) {
      if (!have_best || e.fitness < res.best_fitness) {
        have_best = true;
        res.best = e.genome;
        res.best_fitness = e.fitness;
        res.best_complexity = e.complexity;
        res.best_learning_rate = e.learning_rate;
      }
    }
    res.audit.insert(res.audit.end(), entries.begin(), entries.end());
    if (gen + 1 == cfg.generations) break;

    // Next generation.
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return entries[a].fitness < entries[b].fitness; });
    std::vector<Genome> next;
    for (std::size_t k = 0; k < cfg.elites; ++k) next.push_back(pop[order[k]]);
    auto tournament = [&] {
      const std::size_t a = rng.below(pop.size());
      const std::size_t b = rng.below(pop.size());
      return entries[b].fitness < entries[a].fitness ? pop[b] : pop[a];
    };
    while (next.size() < pop.size()) {
      const Genome p1 = tournament();
      const Genome p2 = tournament();
      Genome child = p1;
      if (rng.uniform01() < cfg.crossover_rate) {
        if (rng.uniform01() < 0.5) child.multiplier = p2.multiplier;
        if (rng.uniform01() < 0.5) child.learning_rate = p2.learning_rate;
      }
      if (rng.uniform01() < cfg.mutation_rate) child.multiplier = rng.below(cfg.multipliers.size());
      if (rng.uniform01() < cfg.mutation_rate) child.learning_rate = rng.below(cfg.learning_rates.size());
      next.push_back(child);
    }
    pop = std::move(next);
  }
  return res;
}

void write_ga_audit_jsonl(std::ostream& os, const GaResult& result) {
  for (const auto& e : result.audit) {
    nlohmann::ordered_json j;
    j["generation"] = e.generation;
    j["index"] = e.index;
    j["genes"] = {{"complexity", e.complexity}, {"learning_rate", e.learning_rate}};
    j["pruned"] = e.pruned;
    j["cached"] = e.cached;
    if (std::isfinite(e.fitness)) {
      j["fitness"] = e.fitness;
    } else {
      j["fitness"] = nullptr;
    }
    os << j.dump() << '\n';
  }
}

}  // namespace gradlore
