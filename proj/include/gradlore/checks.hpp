#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gradlore {

/// Outcome of one oracle comparison run over `total` random cases.
struct CheckResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  double worst = 0.0;  ///< largest error seen
  double tolerance = 0.0;

  bool ok() const { return total > 0 && passed == total; }
};

/// Analytic input Jacobians vs central differences (relative 1e-6).
CheckResult check_input_jacobians(std::size_t cases, std::uint64_t seed);
/// Target-loss parameter gradient vs central differences (relative 1e-5).
CheckResult check_param_grad_target(std::size_t cases, std::uint64_t seed);
/// GI-loss parameter gradient vs central differences (relative 1e-4).
CheckResult check_param_grad_gi(std::size_t cases, std::uint64_t seed);
/// GARCH forecasts vs the unrolled recursion (relative 1e-8).
CheckResult check_garch_recursion(std::size_t cases, std::uint64_t seed);
/// GARCH forecast Jacobians vs central differences (relative 1e-5).
CheckResult check_garch_fd(std::size_t cases, std::uint64_t seed);
/// Ridge-Gradients closed form vs a Newton minimiser on FD derivatives (1e-6).
CheckResult check_rg_closed_form(std::size_t cases, std::uint64_t seed);
/// lambda2 = 0 reproduces the ridge fit bit for bit.
CheckResult check_rg_ridge_reduction(std::size_t cases, std::uint64_t seed);

/// Every check above at its default case count, run on up to `jobs` threads.
std::vector<CheckResult> run_oracle_checks(std::uint64_t seed, std::size_t jobs = 1);

}  // namespace gradlore
