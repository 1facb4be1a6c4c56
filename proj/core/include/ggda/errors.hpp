#pragma once

#include <stdexcept>
#include <string>

namespace ggda {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-side precondition was violated (bad sizes, out-of-range knobs).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data is malformed (bundle parse failures, invariant violations).
class DataError : public Error {
 public:
  using Error::Error;
};

// A solver failed to produce a usable numerical result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ggda
