#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace edgecache {

// Flat "key = value" text. '#' starts a comment; blank lines are ignored.
// Every key that is read is remembered so unknown keys can be reported.
class ConfigMap {
 public:
  static ConfigMap parse(std::string_view text, const std::string& origin = "config");
  static ConfigMap load(const std::string& path);

  // "key=value" override, as given to --set.
  void set(std::string_view assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Keys present in the text but never read; throws ConfigError listing them.
  void reject_unused() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace edgecache
