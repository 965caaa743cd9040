#pragma once

#include <stdexcept>
#include <string>

namespace mmdlab {

/// Invalid argument to a library operation (dimension mismatch, out-of-range
/// parameter, too few samples).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or incomplete configuration. `path` names the offending JSON
/// location when the error comes from a config file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A numerical result violated an internal invariant beyond tolerance.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mmdlab
