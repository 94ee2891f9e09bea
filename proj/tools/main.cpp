#include "experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Gradient-information experiments"};
  app.require_subcommand(1);

  std::string config_path;
  gradlore::app::RunOptions opt;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "INI config")->required();
  run->add_option("--jobs,-j", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed,-s", seed, "Override the config seed");

  std::string dir;
  auto* summarize = app.add_subcommand("summarize", "Print headline numbers from an output directory");
  summarize->add_option("dir", dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (run->parsed()) {
    if (seed_opt->count() > 0) opt.seed = seed;
    return gradlore::app::run_command(config_path, opt, std::cout, std::cerr);
  }
  return gradlore::app::summarize_command(dir, std::cout, std::cerr);
}
