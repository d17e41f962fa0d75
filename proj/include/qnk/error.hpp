#pragma once

#include <stdexcept>
#include <string>

namespace qnk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid construction or validation failed (too few nodes, nonmonotone coordinates, ...).
class InvalidGridError : public Error {
 public:
  using Error::Error;
};

/// Composite Newton-Cotes rule requested on a node count it cannot tile.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Tensor, weight or moment shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument is outside its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Normalized statistics fell below the variance floor.
class DegenerateFieldError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <typename E = DomainError>
inline void require(bool cond, const std::string& what) {
  if (!cond) throw E(what);
}

}  // namespace detail
}  // namespace qnk
