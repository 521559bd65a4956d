#pragma once

#include <stdexcept>
#include <string>

namespace dsl {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of two inputs disagree (row counts, column counts, class counts).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input values violate a container invariant or a precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A file could not be read or parsed.
class DataError : public Error {
public:
    using Error::Error;
};

/// A model archive is malformed, truncated, or of an unsupported version.
class ArchiveError : public Error {
public:
    using Error::Error;
};

/// Training could not proceed (degenerate fold, single-class data, ...).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace dsl
