#pragma once

#include <stdexcept>
#include <string>

namespace mclt {

/// Malformed argument: empty ranges, negative variances, unsorted grids.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A hypothesis required by a bound evaluator does not hold for the input.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested operation has no implementation for this model kind.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Population size left the representable range.
class OverflowError : public std::overflow_error {
 public:
  OverflowError(const std::string& what, std::size_t generation)
      : std::overflow_error(what), generation_(generation) {}
  std::size_t generation() const noexcept { return generation_; }

 private:
  std::size_t generation_;
};

}  // namespace mclt
