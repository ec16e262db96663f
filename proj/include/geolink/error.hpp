#pragma once

#include <stdexcept>
#include <string>

namespace geolink {

/// Runtime failure of a pipeline stage (bad data, I/O, numerical blow-up).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Persisted artifact has the wrong magic, version, or layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Tensor or parameter dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. backward() without a forward pass, or a bad CLI argument.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace geolink
