#include "experiments.hpp"

#include "summary.hpp"

#include "gradlore/checks.hpp"
#include "gradlore/csv.hpp"
#include "gradlore/deltamin.hpp"
#include "gradlore/error.hpp"
#include "gradlore/fig1.hpp"
#include "gradlore/ga.hpp"
#include "gradlore/gan.hpp"
#include "gradlore/parallel.hpp"
#include "gradlore/ridgegrad.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace gradlore::app {

namespace fs = std::filesystem;

namespace {

using Writer = std::function<void(std::ostream&)>;

void write_file(const fs::path& path, const Writer& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  body(out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

struct Plan {
  std::string experiment;
  fs::path out;
  std::function<void(const fs::path&, std::size_t jobs, std::ostream& log)> execute;
};

ProcessSpec resolve_process(Config& cfg, const std::string& section, std::uint64_t seed) {
  ProcessSpec spec;
  spec.kind = parse_process_kind(cfg.get(section + ".process", std::string("cosine2d")));
  if (spec.kind == ProcessKind::exp8d) {
    const std::size_t rows = cfg.get(section + ".exp8d_design_rows", std::size_t{10});
    Rng rng = Rng::derive(seed, 0x38440000);
    spec.exp8d = Exp8dSpec::with_random_design(rows, rng);
  }
  return spec;
}

SweepConfig resolve_sweep(Config& cfg, const std::string& s, std::uint64_t seed) {
  SweepConfig c;
  c.process = resolve_process(cfg, s, seed);
  c.train_sizes = cfg.get(s + ".train_sizes", c.train_sizes);
  c.multipliers = cfg.get(s + ".multipliers", c.multipliers);
  c.hidden_layers = cfg.get(s + ".hidden_layers", c.hidden_layers);
  c.units_per_multiplier = cfg.get(s + ".units_per_multiplier", c.units_per_multiplier);
  c.seeds = cfg.get(s + ".seeds", c.seeds);
  c.test_size = cfg.get(s + ".test_size", c.test_size);
  c.epochs = cfg.get(s + ".epochs", c.epochs);
  c.batch_size = cfg.get(s + ".batch_size", c.batch_size);
  c.learning_rate = cfg.get(s + ".learning_rate", c.learning_rate);
  c.alpha = cfg.get(s + ".alpha", c.alpha);
  c.standardize = cfg.get(s + ".standardize", c.standardize);
  c.measure = parse_accuracy_measure(cfg.get(s + ".measure", std::string(to_string(c.measure))));
  c.base_seed = seed;
  return c;
}

// --- fig1 -----------------------------------------------------------------------

Plan plan_fig1(Config& cfg, std::uint64_t seed) {
  Fig1Config c;
  c.train_sizes = cfg.get("fig1.train_sizes", c.train_sizes);
  c.seeds = cfg.get("fig1.seeds", c.seeds);
  c.test_size = cfg.get("fig1.test_size", c.test_size);
  c.hidden = cfg.get("fig1.hidden", c.hidden);
  c.epochs = cfg.get("fig1.epochs", c.epochs);
  c.batch_size = cfg.get("fig1.batch_size", c.batch_size);
  c.learning_rate = cfg.get("fig1.learning_rate", c.learning_rate);
  c.alpha = cfg.get("fig1.alpha", c.alpha);
  c.standardize = cfg.get("fig1.standardize", c.standardize);
  c.process.lo = cfg.get("fig1.lo", c.process.lo);
  c.process.hi = cfg.get("fig1.hi", c.process.hi);
  c.process.noise = cfg.get("fig1.noise", c.process.noise);
  const std::size_t window = cfg.get("fig1.delta_epochs", std::size_t{50});
  c.base_seed = seed;
  c.validate();
  if (window == 0 || window > c.epochs) throw Error(ErrorCode::Config, "fig1.delta_epochs must be in [1, epochs]");

  return {"fig1", {}, [c, window](const fs::path& dir, std::size_t jobs, std::ostream& log) {
            log << "fig1: " << c.train_sizes.size() << " sizes x " << c.seeds << " seeds x 2 schemes\n";
            const auto res = run_fig1(c, jobs);
            for (const auto& sr : res.sizes) {
              for (bool gi : {false, true}) {
                const auto name = "fig1_history_n" + std::to_string(sr.train_size) + "_" +
                                  (gi ? "gi" : "conventional") + ".csv";
                write_file(dir / name, [&](std::ostream& os) { write_history_csv(os, sr.mean_history(gi)); });
              }
            }
            write_file(dir / "fig1_runs.csv", [&](std::ostream& os) {
              os << "size,seed,scheme,final_test_rmse,mean_param_delta\n";
              for (const auto& sr : res.sizes)
                for (const auto& run : sr.runs)
                  for (bool gi : {false, true}) {
                    const auto& h = gi ? run.gi : run.conventional;
                    double delta = 0.0;
                    for (std::size_t e = 0; e < window; ++e) delta += h.epochs[e].param_delta;
                    os << sr.train_size << ',' << run.seed << ',' << (gi ? "gi" : "conventional") << ','
                       << csv::format(h.epochs.back().test_rmse) << ',' << csv::format(delta / window) << '\n';
                  }
            });
          }};
}

// --- rg -------------------------------------------------------------------------

Plan plan_rg(Config& cfg, std::uint64_t seed) {
  SineSetup setup;
  setup.noise = cfg.get("rg.noise", setup.noise);
  setup.centres = cfg.get("rg.centres", setup.centres);
  setup.width = cfg.get("rg.width", setup.width);
  setup.test_points = cfg.get("rg.test_points", setup.test_points);

  Fig4Config f4;
  f4.setup = setup;
  f4.train_size = cfg.get("rg.fig4_train_size", f4.train_size);
  f4.lambda1 = cfg.get("rg.fig4_lambda1", f4.lambda1);
  f4.lambda2 = cfg.get("rg.fig4_lambda2", f4.lambda2);
  f4.lambda_grad = cfg.get("rg.fig4_lambda_grad", f4.lambda_grad);
  f4.draws = cfg.get("rg.fig4_draws", f4.draws);
  f4.seed = seed;
  f4.validate();

  RgExperimentConfig f6;
  f6.setup = setup;
  f6.sizes = cfg.get("rg.sizes", f6.sizes);
  f6.trials = cfg.get("rg.trials", f6.trials);
  f6.lambda_grid = cfg.get("rg.lambda_grid", f6.lambda_grid);
  f6.lambda2_grid = cfg.get("rg.lambda2_grid", f6.lambda2_grid);
  f6.validation_fraction = cfg.get("rg.validation_fraction", f6.validation_fraction);
  f6.seed = seed;
  f6.validate();

  return {"rg", {}, [f4, f6](const fs::path& dir, std::size_t jobs, std::ostream& log) {
            log << "rg: fig4 over " << f4.draws << " draws, size sweep over " << f6.sizes.size() << " sizes x "
                << f6.trials << " trials\n";
            const auto r4 = run_fig4(f4);
            write_file(dir / "fig4_summary.csv", [&](std::ostream& os) {
              os << "metric,value\n";
              os << "rmse_ridge," << csv::format(r4.mean.rmse_ridge) << '\n';
              os << "rmse_rg," << csv::format(r4.mean.rmse_rg) << '\n';
              os << "test_std," << csv::format(r4.test_std) << '\n';
              os << "grad_rmse_ridge," << csv::format(r4.mean.grad_rmse_ridge) << '\n';
              os << "grad_rmse_grad," << csv::format(r4.mean.grad_rmse_grad) << '\n';
              os << "draws," << r4.draws.size() << '\n';
            });
            write_file(dir / "fig4_predictions.csv", [&](std::ostream& os) { write_fig4_predictions(os, f4, 0); });
            const auto trials = rg_experiment(f6, jobs);
            write_file(dir / "rg_results.csv", [&](std::ostream& os) { write_rg_results_csv(os, trials); });
          }};
}

// --- deltamin -------------------------------------------------------------------

Plan plan_deltamin(Config& cfg, std::uint64_t seed) {
  const SweepConfig c = resolve_sweep(cfg, "deltamin", seed);
  c.validate();
  return {"deltamin", {}, [c](const fs::path& dir, std::size_t jobs, std::ostream& log) {
            log << "deltamin: " << c.train_sizes.size() << " sizes x " << c.multipliers.size() << " complexities x "
                << c.seeds << " seeds\n";
            const auto results = sweep(c, jobs);
            write_file(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, results); });
            write_file(dir / "deltamin_assumptions.csv", [&](std::ostream& os) {
              os << "size,assumption,share,cases\n";
              for (const auto& r : results) {
                const auto a = check_assumptions(r);
                os << r.train_size << ",monotone_slope," << csv::format(a.monotone_slope) << ','
                   << a.monotone_slope_cases << '\n';
                os << r.train_size << ",gi_better," << csv::format(a.gi_better) << ',' << a.gi_better_cases << '\n';
                os << r.train_size << ",gi_slope," << csv::format(a.gi_slope) << ',' << a.gi_slope_cases << '\n';
              }
            });
          }};
}

// --- ga -------------------------------------------------------------------------

void write_ga_result(std::ostream& os, const GaResult& r, bool prune) {
  os << "key,value\n";
  os << "prune," << (prune ? "true" : "false") << '\n';
  os << "best_complexity," << r.best_complexity << '\n';
  os << "best_learning_rate," << csv::format(r.best_learning_rate) << '\n';
  os << "best_fitness," << csv::format(r.best_fitness) << '\n';
  os << "c_upper," << (r.c_upper ? std::to_string(*r.c_upper) : "none") << '\n';
  os << "training_invocations," << r.training_invocations << '\n';
  os << "estimation_invocations," << r.estimation_invocations << '\n';
}

Plan plan_ga(Config& cfg, std::uint64_t seed) {
  GaConfig c;
  c.base = resolve_sweep(cfg, "ga", seed);
  c.multipliers = c.base.multipliers;
  c.learning_rates = cfg.get("ga.learning_rates", c.learning_rates);
  c.population = cfg.get("ga.population", c.population);
  c.generations = cfg.get("ga.generations", c.generations);
  c.mutation_rate = cfg.get("ga.mutation_rate", c.mutation_rate);
  c.crossover_rate = cfg.get("ga.crossover_rate", c.crossover_rate);
  c.elites = cfg.get("ga.elites", c.elites);
  c.prune = cfg.get("ga.prune", c.prune);
  c.c_upper_override = cfg.get_optional("ga.c_upper_override", c.c_upper_override);
  c.estimation_points = cfg.get("ga.estimation_points", c.estimation_points);
  c.estimation_seeds = cfg.get("ga.estimation_seeds", c.estimation_seeds);
  const bool baseline = cfg.get("ga.compare_unpruned", true);
  c.seed = seed;
  c.validate();

  return {"ga", {}, [c, baseline](const fs::path& dir, std::size_t jobs, std::ostream& log) {
            log << "ga: population " << c.population << " x " << c.generations << " generations, pruning "
                << (c.prune ? "on" : "off") << '\n';
            const auto r = ga_optimize(c, jobs);
            write_file(dir / "ga_audit.jsonl", [&](std::ostream& os) { write_ga_audit_jsonl(os, r); });
            write_file(dir / "ga_result.csv", [&](std::ostream& os) { write_ga_result(os, r, c.prune); });
            if (baseline && c.prune) {
              log << "ga: unpruned baseline\n";
              GaConfig off = c;
              off.prune = false;
              const auto b = ga_optimize(off, jobs);
              write_file(dir / "ga_baseline_audit.jsonl", [&](std::ostream& os) { write_ga_audit_jsonl(os, b); });
              write_file(dir / "ga_baseline_result.csv", [&](std::ostream& os) { write_ga_result(os, b, false); });
            }
          }};
}

// --- gan ------------------------------------------------------------------------

struct GanData {
  ImageBatch images;
  std::string source;
};

GanData gan_data(const std::string& source, std::size_t count, std::size_t side, std::uint64_t seed) {
  if (source == "mnist" || source == "auto") {
    const char* env = std::getenv("GRADLORE_DATA");
    const fs::path file = env ? fs::path(env) / "train-images-idx3-ubyte" : fs::path();
    if (env && fs::exists(file)) {
      if (28 % side != 0) throw Error(ErrorCode::Config, "gan.side must divide 28 for MNIST");
      return {load_idx(file, 28 / side, count), "mnist " + file.string()};
    }
    if (source == "mnist") throw Error(ErrorCode::Io, "GRADLORE_DATA does not contain train-images-idx3-ubyte");
  } else if (source != "synthetic") {
    throw Error(ErrorCode::Config, "gan.data must be auto, mnist or synthetic");
  }
  Rng rng = Rng::derive(seed, 0x52454131);
  return {synthetic_digits(count, side, rng), "synthetic digits"};
}

Plan plan_gan(Config& cfg, std::uint64_t seed) {
  GanConfig c;
  const std::string source = cfg.get("gan.data", std::string("auto"));
  const std::size_t images = cfg.get("gan.images", std::size_t{2000});
  const std::size_t side = cfg.get("gan.side", std::size_t{14});
  const std::size_t trials = cfg.get("gan.trials", std::size_t{10});
  c.iterations = cfg.get("gan.iterations", c.iterations);
  c.batch_size = cfg.get("gan.batch_size", c.batch_size);
  c.latent = cfg.get("gan.latent", c.latent);
  c.hidden = cfg.get("gan.hidden", c.hidden);
  c.lr_g = cfg.get("gan.lr_g", c.lr_g);
  c.lr_d = cfg.get("gan.lr_d", c.lr_d);
  c.gamma = cfg.get("gan.gamma", c.gamma);
  c.term = parse_gi_term(cfg.get("gan.term", std::string(to_string(c.term))));
  c.eval_size = cfg.get("gan.eval_size", c.eval_size);
  c.rolling_window = cfg.get("gan.rolling_window", c.rolling_window);
  c.kl_samples = cfg.get("gan.kl_samples", c.kl_samples);
  c.kl_bins = cfg.get("gan.kl_bins", c.kl_bins);
  c.kl_eps = cfg.get("gan.kl_eps", c.kl_eps);
  c.validate();
  if (trials == 0 || images == 0) throw Error(ErrorCode::Config, "gan.trials and gan.images must be >= 1");
  if (source != "auto" && source != "mnist" && source != "synthetic")
    throw Error(ErrorCode::Config, "gan.data must be auto, mnist or synthetic");

  return {"gan", {}, [=](const fs::path& dir, std::size_t jobs, std::ostream& log) {
            const auto data = gan_data(source, images, side, seed);
            log << "gan: " << data.images.size() << " images (" << data.source << "), " << trials << " trials x "
                << c.iterations << " iterations x 2 schemes\n";
            write_file(dir / "gan_data.txt", [&](std::ostream& os) {
              os << "source," << data.source << "\nimages," << data.images.size() << "\nside," << data.images.side
                 << '\n';
            });
            // Even slots conventional, odd slots GI; both runs of a trial share its seed.
            std::vector<std::optional<GanRun>> slots(2 * trials);
            parallel_for(2 * trials, jobs, [&](std::size_t i) {
              GanConfig t = c;
              t.seed = Rng::derive(seed, 0x47414e00 + i / 2).next_u64();
              slots[i].emplace(train_gan(t, data.images, i % 2 == 1));
            });
            std::vector<GanRun> runs;
            for (auto& r : slots) runs.push_back(std::move(*r));
            const char* names[] = {"conventional", "gi"};
            for (std::size_t i = 0; i < runs.size(); ++i) {
              const auto name = std::string("gan_metrics_") + names[i % 2] + "_trial" + std::to_string(i / 2) + ".csv";
              write_file(dir / name, [&](std::ostream& os) { write_gan_metrics_csv(os, runs[i].metrics); });
            }
            write_file(dir / "gan_mean.csv", [&](std::ostream& os) {
              os << "iteration,acc_delta_conventional,rolling_mean_conventional,acc_delta_gi,rolling_mean_gi\n";
              for (std::size_t it = 0; it < c.iterations; ++it) {
                double v[4] = {0, 0, 0, 0};
                for (std::size_t i = 0; i < runs.size(); ++i) {
                  v[2 * (i % 2)] += runs[i].metrics[it].acc_delta / trials;
                  v[2 * (i % 2) + 1] += runs[i].metrics[it].rolling_mean / trials;
                }
                os << it + 1 << ',' << csv::format(v[0]) << ',' << csv::format(v[1]) << ',' << csv::format(v[2])
                   << ',' << csv::format(v[3]) << '\n';
              }
            });
            write_file(dir / "gan_kl.csv", [&](std::ostream& os) {
              os << "trial,scheme,kl_initial_mean,kl_initial_std,kl_final_mean,kl_final_std\n";
              for (std::size_t i = 0; i < runs.size(); ++i)
                os << i / 2 << ',' << names[i % 2] << ',' << csv::format(runs[i].kl_initial.mean) << ','
                   << csv::format(runs[i].kl_initial.std) << ',' << csv::format(runs[i].kl_final.mean) << ','
                   << csv::format(runs[i].kl_final.std) << '\n';
            });
            for (std::size_t s = 0; s < 2; ++s)
              write_file(dir / (std::string("samples_") + names[s] + ".pgm"),
                         [&](std::ostream& os) { write_pgm_grid(os, runs[s].samples, 4); });
            std::vector<std::size_t> first(std::min<std::size_t>(16, data.images.size()));
            for (std::size_t i = 0; i < first.size(); ++i) first[i] = i;
            write_file(dir / "samples_real.pgm",
                       [&](std::ostream& os) { write_pgm_grid(os, data.images.select(first), 4); });
          }};
}

// --- oracle checks ----------------------------------------------------------------

Plan plan_oracle(Config&, std::uint64_t seed) {
  return {"oracle-checks", {}, [seed](const fs::path& dir, std::size_t jobs, std::ostream& log) {
            log << "oracle-checks: running FD and brute-force comparisons\n";
            const auto results = run_oracle_checks(seed, jobs);
            write_file(dir / "oracle_checks.csv", [&](std::ostream& os) {
              os << "check,passed,total,worst,tolerance\n";
              for (const auto& r : results)
                os << r.name << ',' << r.passed << ',' << r.total << ',' << csv::format(r.worst) << ','
                   << csv::format(r.tolerance) << '\n';
            });
          }};
}

Plan resolve(Config& cfg, const RunOptions& opt) {
  const std::string experiment = cfg.require("experiment");
  if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const fs::path out = cfg.get("output", "gradlore-out/" + experiment);
  Plan plan;
  if (experiment == "fig1") {
    plan = plan_fig1(cfg, seed);
  } else if (experiment == "rg") {
    plan = plan_rg(cfg, seed);
  } else if (experiment == "deltamin") {
    plan = plan_deltamin(cfg, seed);
  } else if (experiment == "ga") {
    plan = plan_ga(cfg, seed);
  } else if (experiment == "gan") {
    plan = plan_gan(cfg, seed);
  } else if (experiment == "oracle-checks") {
    plan = plan_oracle(cfg, seed);
  } else {
    throw Error(ErrorCode::Config, "unknown experiment '" + experiment + "'");
  }
  cfg.reject_unknown();
  plan.out = out;
  return plan;
}

void execute(const Plan& plan, const Config& cfg, std::size_t jobs, std::ostream& log) {
  fs::create_directories(plan.out);
  write_file(plan.out / "resolved.ini", [&](std::ostream& os) { cfg.write_resolved(os); });
  plan.execute(plan.out, jobs, log);
  const auto report = summarize_dir(plan.out);
  write_file(plan.out / "summary.txt", [&](std::ostream& os) { os << format_report(report); });
}

}  // namespace

fs::path run_experiment(Config cfg, const RunOptions& opt, std::ostream& log) {
  const Plan plan = resolve(cfg, opt);
  execute(plan, cfg, opt.jobs, log);
  return plan.out;
}

int run_command(const fs::path& config, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  Config cfg;
  Plan plan;
  try {
    cfg = Config::load(config);
    plan = resolve(cfg, opt);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  }
  try {
    execute(plan, cfg, opt.jobs, out);
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return 2;
  }
  std::ifstream summary(plan.out / "summary.txt");
  out << summary.rdbuf();
  return 0;
}

int summarize_command(const fs::path& dir, std::ostream& out, std::ostream& err) {
  try {
    out << format_report(summarize_dir(dir));
    return 0;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return 1;
  }
}

}  // namespace gradlore::app
