#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccpd {

// Base of every error raised by the library. Derived types carry the
// condition name so callers can branch without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No admissible split τ exists for the current buffer length.
class EmptyRange : public Error {
public:
    using Error::Error;
};

class UnsupportedFamily : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// The fit objective became NaN or infinite, usually a divergent step size.
class NonFiniteObjective : public Error {
public:
    using Error::Error;
};

class AlreadyAlarmed : public Error {
public:
    using Error::Error;
};

// A reference or normalisation standard deviation is not positive.
class DegenerateReference : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class InsufficientPrefix : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ccpd
