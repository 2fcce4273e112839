#pragma once

#include <stdexcept>
#include <string>

namespace critcf {

// Input that violates a documented precondition or schema.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical scheme at run time.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepSizeUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NegativityFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CflViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GridTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MassMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace critcf
