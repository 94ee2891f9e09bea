#pragma once

#include "gradlore/processes.hpp"
#include "gradlore/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gradlore {

/// Conventional vs GI training on the quadratic process over several seeds.
struct Fig1Config {
  std::vector<std::size_t> train_sizes{250, 1000};
  std::size_t seeds = 5;
  std::uint64_t base_seed = 0;
  std::size_t test_size = 1000;
  std::size_t hidden = 32;
  std::size_t epochs = 500;
  std::size_t batch_size = 0;
  double learning_rate = 0.01;
  double alpha = 0.5;
  /// Map the input box onto [-1, 1] before training (gradients rescaled to match).
  bool standardize = true;
  QuadraticSpec process;

  void validate() const;
};

struct Fig1Run {
  std::uint64_t seed = 0;
  TrainHistory conventional;
  TrainHistory gi;
};

struct Fig1SizeResult {
  std::size_t train_size = 0;
  std::vector<Fig1Run> runs;

  double mean_final_test_rmse(bool gi) const;
  /// Seed average of the per-epoch parameter delta over the first `epochs` epochs.
  double mean_param_delta(bool gi, std::size_t epochs) const;
  /// Seed-averaged history, epoch by epoch.
  TrainHistory mean_history(bool gi) const;
};

struct Fig1Result {
  std::vector<Fig1SizeResult> sizes;
};

/// Each (size, seed) pair draws its data and initial weights from streams
/// derived from base_seed + seed index; both schemes share them.
Fig1Result run_fig1(const Fig1Config& cfg, std::size_t jobs = 1);

}  // namespace gradlore
