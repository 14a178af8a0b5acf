#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpca {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An argument is outside its admissible range (negative threshold, c <= 0, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Iterative numerics failed (SVD sweep budget exhausted, NaN loss, ...).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, long iteration = -1)
        : Error(iteration < 0 ? what : what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents. Subclasses name the specific defect.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedError : public FormatError {
public:
    using FormatError::FormatError;
};

class CountMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Invalid user configuration (unknown key, bad value).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rpca
