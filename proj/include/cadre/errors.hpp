#pragma once

#include <stdexcept>
#include <string>

namespace cadre {

// Bad user input: malformed scenario, out-of-range config, invalid target.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Filesystem or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file was readable but its contents could not be parsed into the expected schema.
class FormatError : public IoError {
 public:
  FormatError(const std::string& path, const std::string& what)
      : IoError(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// An archive file was built for a different measure grid than the caller expects.
class SpecMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace cadre
