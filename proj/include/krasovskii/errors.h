#pragma once

#include <stdexcept>
#include <string>

namespace krasovskii {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (non-square input, mismatched dimensions).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix lacks the sign structure an operation requires
/// (e.g. a Metzler test handed a matrix with a negative off-diagonal).
class StructureError : public Error {
 public:
  using Error::Error;
};

}  // namespace krasovskii
