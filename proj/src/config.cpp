#include "edgecache/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "edgecache/errors.hpp"

namespace edgecache {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ConfigMap ConfigMap::parse(std::string_view text, const std::string& origin) {
  ConfigMap map;
  long line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    map.values_[key] = std::string(trim(line.substr(eq + 1)));
  }
  return map;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

void ConfigMap::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must look like key=value: " + std::string(assignment));
  }
  const std::string key(trim(assignment.substr(0, eq)));
  if (key.empty()) throw ConfigError("override with empty key");
  values_[key] = std::string(trim(assignment.substr(eq + 1)));
}

const std::string* ConfigMap::find(const std::string& key) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("key " + key + ": not a number: " + *v);
  }
  return out;
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("key " + key + ": not an integer: " + *v);
  }
  return out;
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("key " + key + ": not an unsigned integer: " + *v);
  }
  return out;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("key " + key + ": not a boolean: " + *v);
}

void ConfigMap::reject_unused() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace edgecache
