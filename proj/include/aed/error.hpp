#pragma once

#include <stdexcept>
#include <string>

namespace aed {

// Base type for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input files that cannot be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input (bad manifest line, bad WAV header, bad config key).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally valid input that violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Numerical failure (EM degeneracy, non-finite data).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace aed
