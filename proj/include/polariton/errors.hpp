// errors.hpp - exception hierarchy
#pragma once

#include <stdexcept>
#include <string>

namespace polariton {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent inputs (sizes, missing fields, bad schema).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// NaN, imaginary residues on real observables, runaway norms.
class NumericalHealthError : public Error {
 public:
  using Error::Error;
};

class AnsatzCollapseError : public NumericalHealthError {
 public:
  using NumericalHealthError::NumericalHealthError;
};

class StepUnderflowError : public NumericalHealthError {
 public:
  using NumericalHealthError::NumericalHealthError;
};

}  // namespace polariton
