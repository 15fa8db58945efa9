#pragma once

#include <stdexcept>
#include <string>

namespace lel {

// Base of every error raised by the library. The CLI maps the concrete
// subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files: missing columns, unparsable numbers, bad JSON.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input whose values break an invariant (non-finite, sigma <= 0).
class DataError : public Error {
 public:
  using Error::Error;
};

// Shapes that disagree between inputs that must line up.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied configuration out of range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Internal numerical failure, e.g. a Gram matrix with a clearly negative
// eigenvalue.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A learning problem with fewer than two label categories.
class DegenerateTaskError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace lel
