#pragma once

#include <stdexcept>
#include <string>

namespace qnet {

// Time or value outside a path's domain, or an operation applied to paths
// that violate its preconditions.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input that is well formed but carries no information, e.g. a flat path
// handed to the inverse.
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration: schema problems, violated criticality, missing rates.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedMatrixError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A distribution whose moment generating function diverges on the requested
// interval.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qnet
