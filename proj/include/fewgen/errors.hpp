#pragma once

#include <stdexcept>
#include <string>

namespace fewgen {

// Base class for all library errors. CLI maps subclasses onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension mismatches and degenerate shapes (dim 0, inconsistent layer chains).
struct ShapeError : Error {
  using Error::Error;
};

// Unrecognized magic bytes or malformed container structure.
struct FormatError : Error {
  using Error::Error;
};

// Recognized container but unsupported version.
struct VersionError : Error {
  using Error::Error;
};

// File ended before the declared payload.
struct TruncationError : Error {
  using Error::Error;
};

// Semantically invalid data: non-dense labels, empty classes, non-one-hot
// targets, zero-norm vectors where a direction is required.
struct DataError : Error {
  using Error::Error;
};

// A class label has no semantic vector / embedding.
struct MissingClassError : Error {
  using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
  using Error::Error;
};

// Filesystem-level failures (unopenable path, short write).
struct IoError : Error {
  using Error::Error;
};

}  // namespace fewgen
