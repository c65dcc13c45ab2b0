#pragma once

#include <stdexcept>
#include <string>

namespace stmca {

// Root of every error thrown by the library. The CLI maps the subclasses
// onto process exit codes (see ErrorCategory).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ErrorCategory { config, numerical, other };

// Argument outside the set where an operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid parameter value (alpha outside (0,1), p < 1, h <= 0 ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A caller broke a documented precondition that is not a plain domain issue.
class ContractError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double abscissa);
    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

class TuningError : public Error {
public:
    TuningError(const std::string& what, double coordinate);
    double coordinate() const noexcept { return coordinate_; }

private:
    double coordinate_;
};

class ClassificationError : public Error {
public:
    using Error::Error;
};

class RunawayError : public Error {
public:
    using Error::Error;
};

// Configuration problems carry the JSON path of the offending field.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field_path, const std::string& message);
    const std::string& field_path() const noexcept { return field_path_; }

private:
    std::string field_path_;
};

ErrorCategory categorize(const std::exception& e) noexcept;

}  // namespace stmca
