#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cogkit {

/// Base class for all cogkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
struct IoError : Error {
    using Error::Error;
};

/// Malformed input data. Carries the 1-based line number when known.
struct ParseError : Error {
    std::size_t line = 0;

    explicit ParseError(const std::string& msg) : Error(msg) {}
    ParseError(const std::string& msg, std::size_t line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

/// Argument outside its documented domain (bad range, dimension mismatch,
/// invalid dataset shape).
struct InvalidArgument : Error {
    using Error::Error;
};

/// Numerical routine failed to converge or produced non-finite values.
struct NumericalError : Error {
    using Error::Error;
};

/// Not enough data points to compute the requested statistic.
struct InsufficientData : Error {
    using Error::Error;
};

}  // namespace cogkit
