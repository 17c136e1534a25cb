#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgecache {

// Invalid parameters supplied by a caller or a config file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A binary blob (checkpoint) that cannot be decoded.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A malformed text record; carries the 1-based row number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace edgecache
