#pragma once

#include <stdexcept>
#include <string>

namespace permext {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the analyticity domain, e.g. Im(omega) <= -h.
class DomainError : public Error {
 public:
  using Error::Error;
};

class PoleError : public Error {
 public:
  using Error::Error;
};

// Parameter outside the numerically supported range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Postcondition failure that indicates a discretization bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace permext
