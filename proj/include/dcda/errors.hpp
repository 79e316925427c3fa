#pragma once

#include <stdexcept>
#include <string>

namespace dcda {

// Non-finite or otherwise invalid numeric input to a pure function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Incompatible or invalid configuration (unsupported prox/set pair, m not dividing d, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Divergence, non-convergence, overflow.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dcda
