#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fase {

// Invalid configuration or input (bad geometry, unknown pid, malformed
// trace line, ...). Maps to exit status 1 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input text that failed to parse. Carries the source name and 1-based line.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ConfigError(source + ":" + std::to_string(line) + ": " + what),
        source_(source),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// File could not be opened, read or written. Maps to exit status 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fase
