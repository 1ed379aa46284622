#pragma once

#include <stdexcept>
#include <string>

namespace repwb {

// Operand does not belong to the structure it is used with (wrong group kind,
// non-canonical element, vector outside the ambient space).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition failed (bad parameter, invariance violated, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured cap (ball size, closure dimension, support size, copies) was hit.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature exists but not for this group kind.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative solver ran out of iterations; carries its best estimate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best) : std::runtime_error(what), best_(best) {}
  double best() const { return best_; }

 private:
  double best_;
};

}  // namespace repwb
