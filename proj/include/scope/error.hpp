#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scope {

// Base class of every error thrown by the library. The CLI maps these to
// exit status 1 ("runtime"), except ParseError and ConfigError which map to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainMismatch : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ThresholdOrderError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A column of a data matrix has zero sample variance.
class DegenerateData : public Error {
public:
    DegenerateData(std::size_t column, const std::string& what)
        : Error(what), column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class SingularDesign : public Error {
public:
    using Error::Error;
};

class InfeasibleSlice : public Error {
public:
    using Error::Error;
};

/// Malformed text input (config file, CSV). Carries 1-based line/column.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, std::size_t column, const std::string& msg)
        : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed input with a missing or invalid entry.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace scope
