#pragma once

#include <stdexcept>
#include <string>

namespace critgyro {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid numeric parameters or bounds.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Mismatched shapes, e.g. a cache built for another basis or a vector of the wrong length.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed state vectors handed to an observable.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A requested crossing or endpoint lies outside the sampled range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// The posterior vanished everywhere after a likelihood update.
class DegenerateUpdateError : public Error {
 public:
  using Error::Error;
};

/// A catalog file is empty, unreadable or was produced under different settings.
class StaleCatalogError : public Error {
 public:
  using Error::Error;
};

}  // namespace critgyro
