#pragma once

#include "gradlore/deltamin.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gradlore {

/// Genes are indices into the allowed value lists.
struct Genome {
  std::size_t multiplier = 0;
  std::size_t learning_rate = 0;

  bool operator==(const Genome&) const = default;
};

struct GaConfig {
  /// Process, architecture and training settings; train_sizes[0] is the
  /// training size used for every fitness evaluation.
  SweepConfig base;
  std::vector<std::size_t> multipliers{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> learning_rates{0.003, 0.01, 0.03};
  std::size_t population = 8;
  std::size_t generations = 5;
  double mutation_rate = 0.2;
  double crossover_rate = 0.9;
  std::size_t elites = 1;
  bool prune = true;
  /// Skips the estimation phase when set.
  std::optional<std::size_t> c_upper_override;
  std::size_t estimation_points = 5;
  std::size_t estimation_seeds = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GaAuditEntry {
  std::size_t generation = 0;
  std::size_t index = 0;
  Genome genome;
  std::size_t complexity = 0;
  double learning_rate = 0.0;
  bool pruned = false;
  /// True when the fitness came from an earlier evaluation of the same genome.
  bool cached = false;
  double fitness = 0.0;  ///< +inf when pruned
};

struct GaResult {
  Genome best;
  std::size_t best_complexity = 0;
  double best_learning_rate = 0.0;
  double best_fitness = 0.0;
  std::optional<std::size_t> c_upper;
  /// Model fits run, estimation phase included (a conv/GI pair counts two).
  std::size_t training_invocations = 0;
  std::size_t estimation_invocations = 0;
  std::vector<GaAuditEntry> audit;
};

/// Tournament-of-two selection, uniform crossover, per-gene resampling
/// mutation, elitism. Fitness is conventional test RMSE (lower wins), computed
/// once per distinct genome with a seed derived from the genome, so results do
/// not depend on evaluation order.
GaResult ga_optimize(const GaConfig& cfg, std::size_t jobs = 1);

/// One JSON object per audit entry.
void write_ga_audit_jsonl(std::ostream& os, const GaResult& result);

}  // namespace gradlore
