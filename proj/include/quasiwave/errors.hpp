#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace quasiwave {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed expression text. Carries the byte offset of the first bad token.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// An identifier other than `theta` or a known function name.
class UnknownIdentifierError : public Error {
public:
    UnknownIdentifierError(const std::string& name, std::size_t offset)
        : Error("unknown identifier '" + name + "' (at byte " + std::to_string(offset) + ")"),
          name_(name), offset_(offset) {}
    const std::string& name() const { return name_; }
    std::size_t offset() const { return offset_; }

private:
    std::string name_;
    std::size_t offset_;
};

/// Expression evaluation left its domain (division by zero, log of a
/// non-positive value, non-finite power).
class EvalError : public Error {
public:
    using Error::Error;
};

/// Invalid argument to a constructor or operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A state value at or below the degeneracy point of the wave speed.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Not enough records, or non-monotone data, for a pole fit.
class FitError : public Error {
public:
    using Error::Error;
};

/// A traced characteristic left the grid.
class OutOfDomainError : public Error {
public:
    using Error::Error;
};

/// Scenario file could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Scenario file parsed but a field is invalid. Carries the field path.
class ValidationError : public Error {
public:
    ValidationError(const std::string& field, const std::string& what)
        : Error("invalid field '" + field + "': " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

} // namespace quasiwave
