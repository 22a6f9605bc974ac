#pragma once

#include <stdexcept>
#include <string>

namespace rkl {

/// Argument outside the supported domain of an evaluator.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A quadrature or iteration did not reach its requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A plain-real accessor was asked for a value outside the double range.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace rkl
