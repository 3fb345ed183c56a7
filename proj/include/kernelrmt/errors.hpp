#pragma once

#include <stdexcept>
#include <string>

namespace kernelrmt {

// Values double as CLI exit codes where a code is assigned.
enum class ErrorCode {
  internal = 1,
  config = 2,
  size_cap = 3,
  verification = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Invalid parameters or configuration (bad law, gamma <= 0, unknown key, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

// Argument outside the mathematical domain of an operation (Im z <= 0, pole of R).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::config, what) {}
};

// Kernel with E[k(xi)] != 0 handed to an operation that requires a centered kernel.
class MeanNotZeroError : public ConfigError {
 public:
  MeanNotZeroError(const std::string& what, double a0) : ConfigError(what), a0_(a0) {}
  double a0() const noexcept { return a0_; }

 private:
  double a0_;
};

// Matrix of the wrong shape or without the required symmetry.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCode::config, what) {}
};

// Problem size beyond an enforced cap (quadrature order, matrix dimension, enumeration).
class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error(ErrorCode::size_cap, what) {}
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what) : Error(ErrorCode::verification, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorCode::internal, what) {}
};

}  // namespace kernelrmt
