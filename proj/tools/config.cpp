#include "config.hpp"

#include "gradlore/csv.hpp"
#include "gradlore/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace gradlore::app {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text, const char* want) {
  throw Error(ErrorCode::Config, "key '" + key + "': '" + text + "' is not " + want);
}

std::size_t to_size(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, text, "a non-negative integer");
  return v;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    return csv::parse_double(trim(text));
  } catch (const Error&) {
    bad_value(key, text, "a number");
  }
}

std::string join(const auto& items, auto&& fmt) {
  std::string out;
  for (const auto& v : items) {
    if (!out.empty()) out += ',';
    out += fmt(v);
  }
  return out;
}

}  // namespace

Config Config::parse(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::Config, std::string("cannot parse config: ") + e.message() + " (line " +
                                       std::to_string(e.line()) + ")");
  }
  Config cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      cfg.values_[name] = trim(node.data());
    } else {
      for (const auto& [key, leaf] : node) {
        if (!leaf.empty()) throw Error(ErrorCode::Config, "nested key '" + name + "." + key + "'");
        cfg.values_[name + "." + key] = trim(leaf.data());
      }
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file " + path.string());
  return parse(in);
}

std::optional<std::string> Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void Config::record(const std::string& key, std::string value) {
  const auto it = std::ranges::find(resolved_, key, &std::pair<std::string, std::string>::first);
  if (it != resolved_.end()) {
    it->second = std::move(value);
  } else {
    resolved_.emplace_back(key, std::move(value));
  }
}

std::string Config::require(const std::string& key) {
  const auto v = raw(key);
  if (!v || v->empty()) throw Error(ErrorCode::Config, "missing required key '" + key + "'");
  record(key, *v);
  return *v;
}

std::string Config::get(const std::string& key, const std::string& fallback) {
  const std::string v = raw(key).value_or(fallback);
  record(key, v);
  return v;
}

std::string Config::get(const std::string& key, const char* fallback) { return get(key, std::string(fallback)); }

bool Config::get(const std::string& key, bool fallback) {
  bool v = fallback;
  if (const auto r = raw(key)) {
    if (*r == "true" || *r == "1" || *r == "yes") {
      v = true;
    } else if (*r == "false" || *r == "0" || *r == "no") {
      v = false;
    } else {
      bad_value(key, *r, "a boolean");
    }
  }
  record(key, v ? "true" : "false");
  return v;
}

double Config::get(const std::string& key, double fallback) {
  const auto r = raw(key);
  const double v = r ? to_double(key, *r) : fallback;
  record(key, csv::format(v));
  return v;
}

std::size_t Config::get(const std::string& key, std::size_t fallback) {
  const auto r = raw(key);
  const std::size_t v = r ? to_size(key, *r) : fallback;
  record(key, std::to_string(v));
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) {
  const auto r = raw(key);
  std::uint64_t v = fallback;
  if (r) {
    const auto t = trim(*r);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, *r, "an unsigned 64-bit integer");
  }
  record(key, std::to_string(v));
  return v;
}

std::vector<double> Config::get(const std::string& key, const std::vector<double>& fallback) {
  std::vector<double> v = fallback;
  if (const auto r = raw(key)) {
    v.clear();
    if (!trim(*r).empty())
      for (const auto& item : csv::split(*r)) v.push_back(to_double(key, item));
  }
  record(key, join(v, [](double d) { return csv::format(d); }));
  return v;
}

std::vector<std::size_t> Config::get(const std::string& key, const std::vector<std::size_t>& fallback) {
  std::vector<std::size_t> v = fallback;
  if (const auto r = raw(key)) {
    v.clear();
    if (!trim(*r).empty())
      for (const auto& item : csv::split(*r)) v.push_back(to_size(key, item));
  }
  record(key, join(v, [](std::size_t n) { return std::to_string(n); }));
  return v;
}

std::optional<std::size_t> Config::get_optional(const std::string& key, std::optional<std::size_t> fallback) {
  std::optional<std::size_t> v = fallback;
  if (const auto r = raw(key)) {
    if (*r == "none" || r->empty()) {
      v.reset();
    } else {
      v = to_size(key, *r);
    }
  }
  record(key, v ? std::to_string(*v) : "none");
  return v;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void Config::reject_unknown() const {
  for (const auto& [key, value] : values_) {
    if (std::ranges::find(resolved_, key, &std::pair<std::string, std::string>::first) == resolved_.end())
      throw Error(ErrorCode::Config, "unknown key '" + key + "'");
  }
}

void Config::write_resolved(std::ostream& os) const {
  for (const auto& [key, value] : resolved_)
    if (key.find('.') == std::string::npos) os << key << " = " << value << '\n';
  std::string section;
  for (const auto& [key, value] : resolved_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string s = key.substr(0, dot);
    if (s != section) {
      os << "\n[" << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
}

}  // namespace gradlore::app
