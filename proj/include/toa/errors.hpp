#pragma once

#include <stdexcept>
#include <string>

namespace toa {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation
/// (forbidden energy gap, threshold singularity, negative action integrand).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Caller broke a structural precondition, e.g. a momentum on the wrong
/// half-line or a mixed-sign grid handed to a branch-restricted route.
class ContractViolation : public DomainError {
public:
  using DomainError::DomainError;
};

/// Quadrature cannot resolve the requested problem (Nyquist violation,
/// under-resolved smearing test).
class ResolutionError : public Error {
public:
  using Error::Error;
};

/// Wave packet reached the edge of a periodic position grid.
class LeakageError : public ResolutionError {
public:
  using ResolutionError::ResolutionError;
};

class NoTunnelingError : public DomainError {
public:
  using DomainError::DomainError;
};

/// More than one classically forbidden interval inside a bracket.
class AmbiguityError : public DomainError {
public:
  using DomainError::DomainError;
};

}  // namespace toa
