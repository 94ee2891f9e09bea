#include "gradlore/deltamin.hpp"

#include "gradlore/csv.hpp"
#include "gradlore/error.hpp"
#include "gradlore/parallel.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace gradlore {

bool lower_is_better(AccuracyMeasure m) { return m == AccuracyMeasure::rmse; }

std::string_view to_string(AccuracyMeasure m) {
  return m == AccuracyMeasure::rmse ? "rmse" : "pearson";
}

AccuracyMeasure parse_accuracy_measure(std::string_view name) {
  if (name == "rmse") return AccuracyMeasure::rmse;
  if (name == "pearson") return AccuracyMeasure::pearson;
  throw Error(ErrorCode::Config, "unknown accuracy measure '" + std::string(name) + "'");
}

double accuracy(const Mlp& net, const GiBatch& data, AccuracyMeasure m) {
  if (m == AccuracyMeasure::rmse) return evaluate_rmse(net, data);
  const auto pred = predict(net, data);
  return pearson(pred, data.targets.data());
}

void SweepResult::validate() const {
  if (seeds == 0) throw Error(ErrorCode::BadParams, "SweepResult: seeds must be >= 1");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].complexity <= rows[i - 1].complexity)
      throw Error(ErrorCode::BadParams, "SweepResult: complexities must be strictly increasing");
}

void SweepConfig::validate() const {
  if (train_sizes.empty()) throw Error(ErrorCode::BadParams, "sweep: train_sizes is empty");
  if (multipliers.empty()) throw Error(ErrorCode::BadParams, "sweep: multipliers is empty");
  for (auto n : train_sizes)
    if (n == 0) throw Error(ErrorCode::BadParams, "sweep: train size must be >= 1");
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    if (multipliers[i] == 0) throw Error(ErrorCode::BadWidth, "sweep: multiplier must be >= 1");
    if (i > 0 && multipliers[i] <= multipliers[i - 1])
      throw Error(ErrorCode::BadParams, "sweep: multipliers must be strictly increasing");
  }
  if (hidden_layers == 0 || units_per_multiplier == 0)
    throw Error(ErrorCode::BadWidth, "sweep: hidden_layers and units_per_multiplier must be >= 1");
  if (seeds == 0) throw Error(ErrorCode::BadParams, "sweep: seeds must be >= 1");
  if (test_size < 2) throw Error(ErrorCode::BadParams, "sweep: test_size must be >= 2");
  TrainConfig tc;
  tc.learning_rate = learning_rate;
  tc.alpha = alpha;
  tc.validate();
}

GiBatch SeedData::train_prefix(std::size_t n) const {
  if (n > pool.size()) throw Error(ErrorCode::BadParams, "train_prefix: size exceeds pool");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return pool.select(idx);
}

SeedData make_seed_data(const SweepConfig& cfg, std::uint64_t seed) {
  std::size_t largest = 0;
  for (auto n : cfg.train_sizes) largest = std::max(largest, n);
  Rng rng = Rng::derive(seed, 1);
  SeedData d{generate(cfg.process, largest, rng), generate(cfg.process, cfg.test_size, rng)};
  if (cfg.standardize) {
    const auto box = cfg.process.input_box();
    std::vector<double> center(box.size()), scale(box.size());
    for (std::size_t j = 0; j < box.size(); ++j) {
      center[j] = 0.5 * (box[j].first + box[j].second);
      scale[j] = 0.5 * (box[j].second - box[j].first);
    }
    d.pool = rescale_inputs(d.pool, center, scale);
    d.test = rescale_inputs(d.test, center, scale);
  }
  return d;
}

PairAccuracy train_pair(const SweepConfig& cfg, const GiBatch& train_data, const GiBatch& test_data,
                        std::size_t complexity, double learning_rate, std::uint64_t seed, bool train_gi) {
  if (complexity == 0) throw Error(ErrorCode::BadWidth, "train_pair: complexity must be >= 1");
  std::vector<std::size_t> sizes{train_data.input_dim()};
  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) sizes.push_back(complexity);
  sizes.push_back(train_data.output_dim());
  Rng init = Rng::derive(seed, 0x1000 + complexity);
  const Mlp net = Mlp::random(sizes, OutputActivation::identity, init);

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = learning_rate;
  tc.alpha = cfg.alpha;
  tc.seed = seed;
  GiBatch no_test;
  PairAccuracy out;
  tc.use_gi = false;
  out.a_conv = accuracy(train(net, train_data, no_test, tc).net, test_data, cfg.measure);
  out.a_gi = std::numeric_limits<double>::quiet_NaN();
  if (train_gi) {
    tc.use_gi = true;
    out.a_gi = accuracy(train(net, train_data, no_test, tc).net, test_data, cfg.measure);
  }
  if (!std::isfinite(out.a_conv) || (train_gi && !std::isfinite(out.a_gi)))
    throw Error(ErrorCode::NonFinite, "train_pair: non-finite accuracy (training diverged?)");
  return out;
}

std::vector<SweepResult> sweep(const SweepConfig& cfg, std::size_t jobs) {
  cfg.validate();
  const std::size_t n_sizes = cfg.train_sizes.size();
  const std::size_t n_mult = cfg.multipliers.size();

  std::vector<SeedData> data(cfg.seeds);
  for (std::size_t k = 0; k < cfg.seeds; ++k) data[k] = make_seed_data(cfg, cfg.base_seed + k);
  std::vector<std::vector<GiBatch>> train_sets(cfg.seeds);
  for (std::size_t k = 0; k < cfg.seeds; ++k)
    for (auto n : cfg.train_sizes) train_sets[k].push_back(data[k].train_prefix(n));

  // cell index = (size, multiplier, seed)
  std::vector<PairAccuracy> cells(n_sizes * n_mult * cfg.seeds);
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    const std::size_t k = i % cfg.seeds;
    const std::size_t m = (i / cfg.seeds) % n_mult;
    const std::size_t s = i / (cfg.seeds * n_mult);
    cells[i] = train_pair(cfg, train_sets[k][s], data[k].test, cfg.complexity(cfg.multipliers[m]),
                          cfg.learning_rate, cfg.base_seed + k);
  });

  std::vector<SweepResult> out(n_sizes);
  for (std::size_t s = 0; s < n_sizes; ++s) {
    SweepResult& r = out[s];
    r.kind = cfg.process.kind;
    r.train_size = cfg.train_sizes[s];
    r.seeds = cfg.seeds;
    r.measure = cfg.measure;
    for (std::size_t m = 0; m < n_mult; ++m) {
      SweepRow row;
      row.complexity = cfg.complexity(cfg.multipliers[m]);
      for (std::size_t k = 0; k < cfg.seeds; ++k) {
        const auto& c = cells[(s * n_mult + m) * cfg.seeds + k];
        row.a_conv += c.a_conv;
        row.a_gi += c.a_gi;
      }
      row.a_conv /= static_cast<double>(cfg.seeds);
      row.a_gi /= static_cast<double>(cfg.seeds);
      r.rows.push_back(row);
    }
  }
  return out;
}

DeltaMin delta_min(const SweepResult& result) {
  if (result.rows.size() < 2) throw Error(ErrorCode::TooFewRows, "delta_min: need at least two rows");
  result.validate();
  DeltaMin best{result.rows[0].complexity, std::abs(result.rows[0].a_gi - result.rows[0].a_conv)};
  for (const auto& row : result.rows) {
    const double d = std::abs(row.a_gi - row.a_conv);
    if (d < best.delta) best = {row.complexity, d};
  }
  return best;
}

std::size_t optimal_complexity(const SweepResult& result) {
  if (result.rows.empty()) throw Error(ErrorCode::TooFewRows, "optimal_complexity: empty sweep");
  result.validate();
  const bool lower = lower_is_better(result.measure);
  const SweepRow* best = &result.rows[0];
  for (const auto& row : result.rows) {
    if (lower ? row.a_conv < best->a_conv : row.a_conv > best->a_conv) best = &row;
  }
  return best->complexity;
}

namespace {

double share(std::size_t hits, std::size_t cases) {
  return cases == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(hits) / static_cast<double>(cases);
}

}  // namespace

AssumptionReport check_assumptions(const SweepResult& result) {
  result.validate();
  const auto& rows = result.rows;
  // Flip signs so that "smaller is better" holds for every measure.
  const double sign = lower_is_better(result.measure) ? 1.0 : -1.0;
  auto slope = [&](std::size_t i, bool gi) {
    const double a0 = gi ? rows[i].a_gi : rows[i].a_conv;
    const double a1 = gi ? rows[i + 1].a_gi : rows[i + 1].a_conv;
    return sign * (a1 - a0) / static_cast<double>(rows[i + 1].complexity - rows[i].complexity);
  };

  AssumptionReport rep;
  std::size_t hits = 0;
  for (std::size_t i = 0; i + 2 < rows.size(); ++i) {
    ++rep.monotone_slope_cases;
    if (slope(i + 1, false) >= slope(i, false)) ++hits;
  }
  rep.monotone_slope = share(hits, rep.monotone_slope_cases);

  if (rows.empty()) {
    rep.gi_better = rep.gi_slope = share(0, 0);
    return rep;
  }
  const std::size_t c_star = optimal_complexity(result);
  hits = 0;
  for (const auto& row : rows) {
    if (row.complexity > c_star) break;
    ++rep.gi_better_cases;
    if (sign * row.a_gi <= sign * row.a_conv) ++hits;
  }
  rep.gi_better = share(hits, rep.gi_better_cases);

  hits = 0;
  for (std::size_t i = 0; i + 1 < rows.size() && rows[i + 1].complexity <= c_star; ++i) {
    ++rep.gi_slope_cases;
    if (slope(i, true) >= slope(i, false)) ++hits;
  }
  rep.gi_slope = share(hits, rep.gi_slope_cases);
  return rep;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results) {
  os << "size,complexity,a_conv,a_gi,abs_delta\n";
  for (const auto& r : results)
    for (const auto& row : r.rows)
      os << r.train_size << ',' << row.complexity << ',' << csv::format(row.a_conv) << ','
         << csv::format(row.a_gi) << ',' << csv::format(std::abs(row.a_gi - row.a_conv)) << '\n';
}

}  // namespace gradlore
