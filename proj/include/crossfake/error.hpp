#pragma once

#include <stdexcept>
#include <string>

namespace crossfake {

// Exit codes reported by the command-line tool. Each exception family below
// maps to exactly one of them.
enum class ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kConfig = 2,
  kExternalService = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kValidation; }
};

// Bad input data: unparsable rows, missing labels, empty bodies.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range configuration, including checkpoint
// compatibility failures.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

// A translation or other remote service failed. `retryable` distinguishes an
// unreachable backend from a malformed answer.
class ServiceError : public Error {
 public:
  ServiceError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kExternalService; }

 private:
  bool retryable_;
};

}  // namespace crossfake
