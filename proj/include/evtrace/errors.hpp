#pragma once

#include <stdexcept>
#include <string>

namespace evtrace {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (non-positive dims, bad thresholds, unknown keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value violates a type invariant (non-finite radiance, bad polarity, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Malformed file: bad magic, unsupported version, truncation, bad CSV.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Coordinate or timestamp outside the declared extent.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Two sparse records land on the same (pixel, tick).
class CollisionError : public Error {
 public:
  using Error::Error;
};

/// Tensor or sequence shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

class ShapeMismatchError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

/// backward() was handed a cache that does not belong to the given params/config.
class CacheMismatchError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace evtrace
