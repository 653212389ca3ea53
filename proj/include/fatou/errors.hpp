#pragma once

#include <stdexcept>
#include <string>

namespace fatou {

/// Argument outside the mathematical domain of an operation (r <= 0, t <= 0,
/// mismatched groups).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A numerical evaluation failed: non-finite integrand, quadrature did not
/// converge. The message carries the location and the achieved estimate.
class EvaluationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition does not hold (step too large, missing
/// certificate).
class PreconditionError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Malformed configuration or command line.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

} // namespace fatou
