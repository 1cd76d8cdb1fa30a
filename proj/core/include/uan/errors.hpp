#pragma once

#include <stdexcept>
#include <string>

namespace uan {

/// Operand dimensions disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-supplied object broke a structural promise (empty selector
/// output, out-of-range piece index, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Parameter outside its admissible window (relaxation, step size, weights).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace uan
