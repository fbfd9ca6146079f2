#pragma once

#include <stdexcept>
#include <string>

namespace tslin {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid structure in user-supplied data (overlapping atoms, inconsistent dimensions, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside an operation's domain (time not in the scale, non-square matrix, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Required samples are missing from a sampled function or trajectory.
class DataError : public Error {
public:
    using Error::Error;
};

/// An iterative numeric procedure failed to reach its tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A standing assumption of the analysis is violated (e.g. unbounded graininess).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed input text (system files, CLI values).
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace tslin
