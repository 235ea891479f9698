#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace btpoison {

// Base of every error raised by the toolkit. code() is a stable
// machine-readable tag used by the CLI's error line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("precondition", message) {}
};

class SizeError : public Error {
 public:
  explicit SizeError(const std::string& message) : Error("size", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("config", message) {}
};

class NoAttackSurfaceError : public Error {
 public:
  explicit NoAttackSurfaceError(const std::string& message)
      : Error("no_attack_surface", message) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& message)
      : Error("contract", message) {}
};

class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& message)
      : Error("undefined_metric", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error("format", message) {}
};

// Raised by translation/generation backends. batch_indices lists the input
// positions of the batch that failed.
class BackendError : public Error {
 public:
  BackendError(const std::string& message, std::vector<std::size_t> batch_indices,
               std::string code = "backend")
      : Error(std::move(code), message),
        batch_indices_(std::move(batch_indices)) {}

  const std::vector<std::size_t>& batch_indices() const noexcept {
    return batch_indices_;
  }

 private:
  std::vector<std::size_t> batch_indices_;
};

class ProtocolError : public BackendError {
 public:
  ProtocolError(const std::string& message, std::vector<std::size_t> batch_indices)
      : BackendError(message, std::move(batch_indices), "protocol") {}
};

}  // namespace btpoison
