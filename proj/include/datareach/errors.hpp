#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace datareach {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform (vector length, matrix size, tensor size).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. sqrt of a negative interval).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Data contradicts the supplied envelopes or side information (an intersection came out empty).
class InconsistentData : public Error {
 public:
  using Error::Error;
};

/// The a priori enclosure iteration did not find a box satisfying the fixed-point inclusion.
class EnclosureFailure : public Error {
 public:
  EnclosureFailure(const std::string& what, std::ptrdiff_t step = -1)
      : Error(what), step_(step) {}

  /// Index of the failing reach step, or -1 when raised outside a tube computation.
  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

/// An optimization routine hit its iteration cap before meeting its tolerance.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// The optimistic relaxation has an empty feasible set for every admissible control.
class InfeasibleIntersection : public Error {
 public:
  using Error::Error;
};

}  // namespace datareach
