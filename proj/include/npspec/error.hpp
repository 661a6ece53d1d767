#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace npspec {

/// Base class for every failure raised by the toolkit. `code()` is a short
/// machine-readable tag that the CLI copies into its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class SelfIntersection : public Error {
public:
    SelfIntersection(int first_arc, int second_arc)
        : Error("self_intersection",
                "curve self-intersects between arcs " + std::to_string(first_arc) + " and " +
                    std::to_string(second_arc)),
          first_(first_arc), second_(second_arc) {}

    int first_arc() const noexcept { return first_; }
    int second_arc() const noexcept { return second_; }

private:
    int first_;
    int second_;
};

class AssemblyError : public Error {
public:
    explicit AssemblyError(const std::string& message) : Error("assembly_failure", message) {}
};

class SpectrumError : public Error {
public:
    explicit SpectrumError(const std::string& message) : Error("spectrum_failure", message) {}
};

class SingularResolvent : public Error {
public:
    SingularResolvent(const std::string& message, double nearest)
        : Error("singular_resolvent", message), nearest_(nearest) {}

    double nearest_eigenvalue() const noexcept { return nearest_; }

private:
    double nearest_;
};

class DegenerateEigenvalue : public Error {
public:
    explicit DegenerateEigenvalue(const std::string& message)
        : Error("degenerate_eigenvalue", message) {}
};

class PulseError : public Error {
public:
    explicit PulseError(const std::string& message) : Error("pulse_failure", message) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& message) : Error("schema_error", message) {}
};

} // namespace npspec
