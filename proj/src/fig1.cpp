#include "gradlore/fig1.hpp"

#include "gradlore/error.hpp"
#include "gradlore/parallel.hpp"

namespace gradlore {

void Fig1Config::validate() const {
  if (train_sizes.empty()) throw Error(ErrorCode::BadParams, "fig1: train_sizes is empty");
  for (auto n : train_sizes)
    if (n == 0) throw Error(ErrorCode::BadParams, "fig1: train size must be >= 1");
  if (seeds == 0) throw Error(ErrorCode::BadParams, "fig1: seeds must be >= 1");
  if (test_size == 0) throw Error(ErrorCode::BadParams, "fig1: test_size must be >= 1");
  if (hidden == 0) throw Error(ErrorCode::BadWidth, "fig1: hidden width must be >= 1");
  if (!(process.hi > process.lo)) throw Error(ErrorCode::BadParams, "fig1: empty input interval");
  TrainConfig tc;
  tc.learning_rate = learning_rate;
  tc.alpha = alpha;
  tc.validate();
}

namespace {

Fig1Run run_one(const Fig1Config& cfg, std::size_t train_size, std::uint64_t seed) {
  Rng data_rng = Rng::derive(seed, 1);
  GiBatch train_data = gen_quadratic(train_size, data_rng, cfg.process);
  GiBatch test_data = gen_quadratic(cfg.test_size, data_rng, cfg.process);
  if (cfg.standardize) {
    const double center[] = {0.5 * (cfg.process.lo + cfg.process.hi)};
    const double scale[] = {0.5 * (cfg.process.hi - cfg.process.lo)};
    train_data = rescale_inputs(train_data, center, scale);
    test_data = rescale_inputs(test_data, center, scale);
  }
  Rng init_rng = Rng::derive(seed, 2);
  const Mlp net = Mlp::random({1, cfg.hidden, 1}, OutputActivation::identity, init_rng);

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.alpha = cfg.alpha;
  tc.seed = seed;
  tc.train_size = train_size;
  tc.test_size = cfg.test_size;

  Fig1Run run;
  run.seed = seed;
  tc.use_gi = false;
  run.conventional = train(net, train_data, test_data, tc).history;
  tc.use_gi = true;
  run.gi = train(net, train_data, test_data, tc).history;
  return run;
}

}  // namespace

Fig1Result run_fig1(const Fig1Config& cfg, std::size_t jobs) {
  cfg.validate();
  Fig1Result result;
  result.sizes.resize(cfg.train_sizes.size());
  for (std::size_t s = 0; s < cfg.train_sizes.size(); ++s) {
    result.sizes[s].train_size = cfg.train_sizes[s];
    result.sizes[s].runs.resize(cfg.seeds);
  }
  const std::size_t cells = cfg.train_sizes.size() * cfg.seeds;
  parallel_for(cells, jobs, [&](std::size_t i) {
    const std::size_t s = i / cfg.seeds;
    const std::size_t k = i % cfg.seeds;
    result.sizes[s].runs[k] = run_one(cfg, cfg.train_sizes[s], cfg.base_seed + k);
  });
  return result;
}

double Fig1SizeResult::mean_final_test_rmse(bool gi) const {
  if (runs.empty()) throw Error(ErrorCode::Empty, "fig1: no runs");
  double sum = 0.0;
  for (const auto& r : runs) {
    const auto& h = gi ? r.gi : r.conventional;
    if (h.epochs.empty()) throw Error(ErrorCode::Empty, "fig1: empty history");
    sum += h.epochs.back().test_rmse;
  }
  return sum / static_cast<double>(runs.size());
}

double Fig1SizeResult::mean_param_delta(bool gi, std::size_t epochs) const {
  if (runs.empty()) throw Error(ErrorCode::Empty, "fig1: no runs");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : runs) {
    const auto& h = gi ? r.gi : r.conventional;
    for (std::size_t e = 0; e < epochs && e < h.epochs.size(); ++e) {
      sum += h.epochs[e].param_delta;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::Empty, "fig1: no epochs to average");
  return sum / static_cast<double>(count);
}

TrainHistory Fig1SizeResult::mean_history(bool gi) const {
  TrainHistory out;
  if (runs.empty()) return out;
  const double inv = 1.0 / static_cast<double>(runs.size());
  out.epochs.resize((gi ? runs[0].gi : runs[0].conventional).epochs.size());
  for (std::size_t e = 0; e < out.epochs.size(); ++e) {
    EpochRecord& m = out.epochs[e];
    m.epoch = e + 1;
    for (const auto& r : runs) {
      const auto& rec = (gi ? r.gi : r.conventional).epochs.at(e);
      m.train_rmse += rec.train_rmse * inv;
      m.test_rmse += rec.test_rmse * inv;
      m.param_delta += rec.param_delta * inv;
    }
  }
  return out;
}

}  // namespace gradlore
