#pragma once

#include "gradlore/gi_batch.hpp"
#include "gradlore/mlp.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace gradlore {

struct TrainConfig {
  std::size_t epochs = 500;
  /// 0 or >= train size means full-batch gradient descent.
  std::size_t batch_size = 0;
  double learning_rate = 0.01;
  /// Weight on the target loss; the GI loss gets 1 - alpha.
  double alpha = 0.5;
  bool use_gi = false;
  std::uint64_t seed = 0;
  std::size_t train_size = 250;
  std::size_t test_size = 1000;

  /// Throws BadParams (non-positive rate) or BadAlpha.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  /// Mean absolute per-parameter update, both loss terms counted.
  double param_delta = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  Mlp net;
  TrainHistory history;
};

/// Plain SGD on E (and E_grad when cfg.use_gi). Minibatch order comes from a
/// stream seeded by cfg.seed and is consumed identically with or without GI.
TrainResult train(Mlp net, const GiBatch& train_data, const GiBatch& test_data, const TrainConfig& cfg);

/// sqrt(mean((pred - truth)^2)); throws Empty on empty input.
double rmse(std::span<const double> pred, std::span<const double> truth);
/// Sample correlation; throws ZeroVariance if either side is constant.
double pearson(std::span<const double> pred, std::span<const double> truth);

/// Network outputs for every sample, flattened sample-major.
std::vector<double> predict(const Mlp& net, const GiBatch& batch);
/// RMSE of the network over every output entry of `batch`.
double evaluate_rmse(const Mlp& net, const GiBatch& batch);

/// epoch,train_rmse,test_rmse,param_delta
void write_history_csv(std::ostream& os, const TrainHistory& history);

}  // namespace gradlore
