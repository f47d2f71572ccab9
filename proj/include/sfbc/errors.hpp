#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sfbc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Raised when a diagonal covariance estimate has a zero entry, which only
// happens for degenerate (e.g. all-zero) captures.
class SingularCovarianceError : public Error {
 public:
  using Error::Error;
};

class NoBracketError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::uint64_t byte_offset)
      : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

}  // namespace sfbc
