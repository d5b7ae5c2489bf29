#pragma once

#include <stdexcept>
#include <string>

namespace relaycrb {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a numerical computation cannot produce a meaningful value
/// (singular Fisher matrix, non-finite integrand, degenerate denominator).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration file or command-line validation failure.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relaycrb
