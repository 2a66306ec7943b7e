#pragma once

#include <stdexcept>
#include <string>

namespace dsaee {

// Error categories map one-to-one onto the CLI exit codes and the C API
// status values.
enum class ErrorKind {
  kUsage = 1,    // bad parameters, unknown keys, invalid configuration
  kData = 2,     // malformed or unsuitable input data
  kNumeric = 3,  // non-finite values during computation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::kData, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::kNumeric, message) {}
};

// Throws the subclass matching `kind`.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
  switch (kind) {
    case ErrorKind::kUsage: throw UsageError(message);
    case ErrorKind::kData: throw DataError(message);
    case ErrorKind::kNumeric: throw NumericError(message);
  }
  throw Error(kind, message);
}

}  // namespace dsaee
