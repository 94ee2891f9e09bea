#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gradlore::app {

/// One headline comparison read back from a run's artifacts.
struct Verdict {
  std::string id;  ///< e.g. "fig1.a", "oracle.garch_vs_recursion"
  std::string label;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::vector<std::string> lines;  ///< tables and headline numbers
  std::vector<Verdict> verdicts;
};

/// Reads whatever known artifacts the directory holds. Throws
/// MissingArtifacts when there are none.
Report summarize_dir(const std::filesystem::path& dir);

std::string format_report(const Report& report);

}  // namespace gradlore::app
