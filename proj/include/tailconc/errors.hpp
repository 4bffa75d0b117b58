#pragma once

#include <stdexcept>
#include <string>

namespace tailconc {

/// Argument outside the mathematical domain of an operation (bad parameter,
/// probability outside (0,1), point outside a support).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Gamma evaluated at a non-positive integer.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Second-order coefficient requested on the line rho = -(1 ^ xi), where only the
/// boundary expansion applies.
class BoundaryRegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical routine could not reach its stated accuracy.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probability level outside the range covered by a tabulated oracle.
class RangeError : public PrecisionError {
 public:
  using PrecisionError::PrecisionError;
};

/// Simulation would exceed its configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (model specs, command lines).
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace tailconc
