#ifndef NATS_ERRORS_HPP
#define NATS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nats {

/// Invalid configuration or input file. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; message carries the offending line number.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, long line)
      : ConfigError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Numerical failure (singular system, non-finite result). CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nats

#endif  // NATS_ERRORS_HPP
