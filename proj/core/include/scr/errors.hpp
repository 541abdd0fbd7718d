#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scr {

enum class ErrorKind {
    invalid_parameter,
    parse,
    validation,
    singularity,
    unstable,
    convergence,
    near_resonance,
    no_resonance,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base class for every error raised by the toolkit.
///
/// The kind separates bad input (parameter, parse, validation) from failures of
/// the computation itself, which the CLI maps onto distinct exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for instability, non-convergence and similar numerical failures.
    bool is_computational() const noexcept;

private:
    ErrorKind kind_;
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& message)
        : Error(ErrorKind::invalid_parameter, message) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error(ErrorKind::parse, message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(ErrorKind::validation, message) {}
};

class ComputationError : public Error {
public:
    ComputationError(ErrorKind kind, const std::string& message) : Error(kind, message) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw InvalidParameter(message);
    }
}

}  // namespace scr
