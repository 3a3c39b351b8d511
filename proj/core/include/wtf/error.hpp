#pragma once

#include <stdexcept>
#include <string>

namespace wtf {

/// Inconsistent tensor/matrix dimensions, bad mode indices, rank mismatches.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dual variable left the domain of a conjugate (u >= lambda for the
/// semi-unbalanced loss). Line searches catch this and backtrack.
class DomainViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bad user-supplied configuration or input values.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wtf
