#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gradlore::app {

/// Flat INI file: top-level keys plus one section per experiment. Every key
/// read through a getter is recorded with its effective value so the run can
/// echo a fully resolved copy; keys never read are rejected.
class Config {
 public:
  static Config parse(std::istream& is);
  static Config load(const std::filesystem::path& path);

  /// Required top-level string; throws Config naming the key.
  std::string require(const std::string& key);

  std::string get(const std::string& key, const std::string& fallback);
  std::string get(const std::string& key, const char* fallback);
  bool get(const std::string& key, bool fallback);
  double get(const std::string& key, double fallback);
  std::size_t get(const std::string& key, std::size_t fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  std::vector<double> get(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::size_t> get(const std::string& key, const std::vector<std::size_t>& fallback);
  /// "none" or empty reads as no value.
  std::optional<std::size_t> get_optional(const std::string& key, std::optional<std::size_t> fallback);

  /// Replaces a value (command-line overrides); recorded like a read.
  void set(const std::string& key, const std::string& value);

  /// Throws Config for any key present in the file but never read.
  void reject_unknown() const;
  /// Resolved values, top-level keys first, then one block per section.
  void write_resolved(std::ostream& os) const;

 private:
  std::optional<std::string> raw(const std::string& key) const;
  void record(const std::string& key, std::string value);

  std::map<std::string, std::string> values_;  ///< "section.key" or "key"
  std::vector<std::pair<std::string, std::string>> resolved_;
};

}  // namespace gradlore::app
