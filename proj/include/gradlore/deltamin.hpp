#pragma once

#include "gradlore/processes.hpp"
#include "gradlore/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gradlore {

/// RMSE improves downwards, correlation upwards.
enum class AccuracyMeasure { rmse, pearson };

bool lower_is_better(AccuracyMeasure m);
std::string_view to_string(AccuracyMeasure m);
AccuracyMeasure parse_accuracy_measure(std::string_view name);

/// Accuracy of `net` on `data` under measure `m`. Pearson pools every output entry.
double accuracy(const Mlp& net, const GiBatch& data, AccuracyMeasure m);

struct SweepRow {
  std::size_t complexity = 0;  ///< nodes per hidden layer
  double a_conv = 0.0;
  double a_gi = 0.0;
};

struct SweepResult {
  ProcessKind kind = ProcessKind::cosine2d;
  std::size_t train_size = 0;
  std::size_t seeds = 0;
  AccuracyMeasure measure = AccuracyMeasure::rmse;
  std::vector<SweepRow> rows;

  /// Throws BadParams unless complexities are strictly increasing and seeds >= 1.
  void validate() const;
};

struct SweepConfig {
  ProcessSpec process;
  std::vector<std::size_t> train_sizes{50, 100, 300};
  /// Width multipliers; a hidden layer has multiplier * units_per_multiplier nodes.
  std::vector<std::size_t> multipliers{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t hidden_layers = 4;
  std::size_t units_per_multiplier = 4;
  std::size_t seeds = 5;
  std::uint64_t base_seed = 0;
  std::size_t test_size = 1000;
  std::size_t epochs = 300;
  std::size_t batch_size = 10;
  double learning_rate = 0.01;
  double alpha = 0.5;
  /// Map the sampling box onto [-1, 1]^d before training.
  bool standardize = true;
  AccuracyMeasure measure = AccuracyMeasure::rmse;

  void validate() const;
  std::size_t complexity(std::size_t multiplier) const { return multiplier * units_per_multiplier; }
};

/// Train and test data for one seed: a pool of max(train_sizes) samples (each
/// size uses a prefix) plus a held-out test set, already standardised.
struct SeedData {
  GiBatch pool;
  GiBatch test;

  GiBatch train_prefix(std::size_t n) const;
};

SeedData make_seed_data(const SweepConfig& cfg, std::uint64_t seed);

struct PairAccuracy {
  double a_conv = 0.0;
  double a_gi = 0.0;
};

/// One conventional and one GI model sharing initial weights and shuffles.
/// With `train_gi` false only the conventional model is trained (a_gi = NaN).
PairAccuracy train_pair(const SweepConfig& cfg, const GiBatch& train_data, const GiBatch& test_data,
                        std::size_t complexity, double learning_rate, std::uint64_t seed,
                        bool train_gi = true);

/// One SweepResult per training size, rows in multiplier order, seed averaged.
std::vector<SweepResult> sweep(const SweepConfig& cfg, std::size_t jobs = 1);

struct DeltaMin {
  std::size_t c_upper = 0;
  double delta = 0.0;
};

/// argmin over rows of |a_gi - a_conv|, ties to the smallest complexity.
/// Throws TooFewRows below two rows.
DeltaMin delta_min(const SweepResult& result);

/// Complexity with the best conventional accuracy, ties to the smallest.
/// Throws TooFewRows on an empty result.
std::size_t optimal_complexity(const SweepResult& result);

/// Share of the checkable cases where each assumption holds; NaN when a
/// check has no cases.
struct AssumptionReport {
  double monotone_slope = 0.0;  ///< slope of A non-decreasing in c (RMSE sense)
  std::size_t monotone_slope_cases = 0;
  double gi_better = 0.0;  ///< A_gi no worse than A_conv for c <= c*
  std::size_t gi_better_cases = 0;
  double gi_slope = 0.0;  ///< GI slope no steeper than the conventional one for c <= c*
  std::size_t gi_slope_cases = 0;
};

AssumptionReport check_assumptions(const SweepResult& result);

/// size,complexity,a_conv,a_gi,abs_delta
void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results);

}  // namespace gradlore
