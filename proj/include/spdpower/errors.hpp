#pragma once

#include <stdexcept>
#include <string>

namespace spdpower {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input leaves the mathematical domain of an operation (e.g. a matrix
/// logarithm of a matrix with a non-positive eigenvalue).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative kernel failed to converge within its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A quantity that must be non-degenerate (nonzero norm, nonzero
/// denominator) vanished.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Fitted covariance is singular or numerically unusable
/// (condition number above the configured cap).
class SingularSigmaError : public Error {
public:
    using Error::Error;
};

/// Every grid point of a likelihood sweep failed.
class AllPointsFailedError : public Error {
public:
    using Error::Error;
};

/// Rejection sampling exceeded its attempt cap; the design is infeasible.
class RejectionLimitError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line` is 1-based; 0 when not attributable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Structurally wrong input row (bad column count, bad field types).
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::size_t line = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace spdpower
