#pragma once

#include <stdexcept>
#include <string>

namespace tracex {

/// Failure category; maps one-to-one onto CLI exit codes and C API status codes.
enum class ErrorKind {
  kConfig = 1,   // bad flags, bad config values, violated preconditions
  kData = 2,     // missing files, malformed inputs, dangling ids
  kNumeric = 3,  // NaN/Inf produced by a computation
  kIo = 4,       // unwritable output path
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ConfigError(const std::string& what) {
  return Error(ErrorKind::kConfig, what);
}
inline Error DataError(const std::string& what) {
  return Error(ErrorKind::kData, what);
}
inline Error NumericError(const std::string& what) {
  return Error(ErrorKind::kNumeric, what);
}
inline Error IoError(const std::string& what) {
  return Error(ErrorKind::kIo, what);
}

}  // namespace tracex
