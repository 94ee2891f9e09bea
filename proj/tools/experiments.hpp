#pragma once

#include "config.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace gradlore::app {

struct RunOptions {
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;  ///< overrides the config's seed
};

/// Resolves every parameter of the configured experiment, runs it, and writes
/// resolved.ini, the experiment's CSVs and summary.txt into the output
/// directory, which is returned. Config errors surface before any work starts.
std::filesystem::path run_experiment(Config cfg, const RunOptions& opt, std::ostream& log);

/// `run` subcommand: 0 on success, 1 on a config error, 2 on a runtime failure.
int run_command(const std::filesystem::path& config, const RunOptions& opt, std::ostream& out, std::ostream& err);

/// `summarize` subcommand: 0 on success, 1 when the directory has no artifacts.
int summarize_command(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

}  // namespace gradlore::app
