#pragma once
#include <stdexcept>
#include <string>

namespace mlslab {

// Base of all library errors. kind() is the short tag used on the CLI
// error line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class TrivialClassError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "trivial_class"; }
};

class InvalidModelError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_model"; }
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// Solver, quadrature and iteration failures.
class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

}  // namespace mlslab
