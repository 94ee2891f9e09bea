#include "gradlore/trainer.hpp"

#include "gradlore/csv.hpp"
#include "gradlore/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace gradlore {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::BadParams, "TrainConfig: learning_rate must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::BadAlpha, "TrainConfig: alpha must lie in [0, 1]");
}

TrainResult train(Mlp net, const GiBatch& train_data, const GiBatch& test_data, const TrainConfig& cfg) {
  cfg.validate();
  train_data.validate();
  if (train_data.size() == 0) throw Error(ErrorCode::Empty, "train: empty training set");

  const std::size_t n = train_data.size();
  const std::size_t batch = (cfg.batch_size == 0 || cfg.batch_size >= n) ? n : cfg.batch_size;
  const bool full_batch = batch == n;
  const double alpha = cfg.use_gi ? cfg.alpha : 1.0;

  Rng shuffle_rng = Rng::derive(cfg.seed, 0x5348554646ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  ParamGrad g_target(net.parameter_count());
  ParamGrad g_gi(net.parameter_count());
  TrainHistory history;
  history.epochs.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!full_batch) shuffle_rng.shuffle(order);
    double delta_sum = 0.0;
    std::size_t updates = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      const GiBatch* mb = &train_data;
      GiBatch subset;
      if (!full_batch) {
        subset = train_data.select(std::span<const std::size_t>(order).subspan(start, count));
        mb = &subset;
      }
      param_grads(net, *mb, g_target, alpha < 1.0 ? std::span<double>(g_gi) : std::span<double>());
      const auto stats = apply_update(net, g_target, g_gi, cfg.learning_rate, alpha);
      delta_sum += stats.mean_abs_contribution;
      ++updates;
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_rmse = evaluate_rmse(net, train_data);
    rec.test_rmse = test_data.size() > 0 ? evaluate_rmse(net, test_data) : 0.0;
    rec.param_delta = delta_sum / static_cast<double>(updates);
    history.epochs.push_back(rec);
  }
  return {std::move(net), std::move(history)};
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty()) throw Error(ErrorCode::Empty, "rmse: empty input");
  if (pred.size() != truth.size()) throw Error(ErrorCode::ShapeMismatch, "rmse: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double pearson(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty()) throw Error(ErrorCode::Empty, "pearson: empty input");
  if (pred.size() != truth.size()) throw Error(ErrorCode::ShapeMismatch, "pearson: length mismatch");
  const double n = static_cast<double>(pred.size());
  const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
  const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double a = pred[i] - mp;
    const double b = truth[i] - mt;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw Error(ErrorCode::ZeroVariance, "pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> predict(const Mlp& net, const GiBatch& batch) {
  std::vector<double> out;
  out.reserve(batch.size() * net.output_dim());
  ForwardTrace trace;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    trace_forward(net, batch.x(i), trace);
    const auto y = trace.output();
    out.insert(out.end(), y.begin(), y.end());
  }
  return out;
}

double evaluate_rmse(const Mlp& net, const GiBatch& batch) {
  return rmse(predict(net, batch), batch.targets.data());
}

void write_history_csv(std::ostream& os, const TrainHistory& history) {
  os << "epoch,train_rmse,test_rmse,param_delta\n";
  for (const auto& r : history.epochs) {
    os << r.epoch << ',' << csv::format(r.train_rmse) << ',' << csv::format(r.test_rmse) << ','
       << csv::format(r.param_delta) << '\n';
  }
}

}  // namespace gradlore
