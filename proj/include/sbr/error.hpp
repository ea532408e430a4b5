#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based; 0 when no line applies.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Series or iteration failed to reach the requested precision.
class PrecisionError : public Error {
public:
    using Error::Error;
};

/// Linear solve failed.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace sbr
