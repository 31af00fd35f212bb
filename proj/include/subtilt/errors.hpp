#pragma once

#include <stdexcept>
#include <string>

namespace subtilt {

// Base class so callers can catch everything thrown by this library at once.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the domain of a model or operation (e.g. |eta| >= xi).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// An iterative solver hit its iteration cap without bracketing/refining to tolerance.
class ConvergenceFailure : public Error {
public:
    explicit ConvergenceFailure(const std::string& msg) : Error(msg) {}
};

// Adaptive quadrature exhausted its interval budget above the requested tolerance,
// or a truncation scan hit its range cap without the integrand tail decaying.
class QuadratureFailure : public Error {
public:
    explicit QuadratureFailure(const std::string& msg) : Error(msg) {}
};

// Quantity is undefined at the requested point (e.g. relative variance at eta = 0).
class UndefinedAtZero : public Error {
public:
    explicit UndefinedAtZero(const std::string& msg) : Error(msg) {}
};

// The numeric inverse-CDF sampler could not bracket a quantile or fit a decaying tail.
class GenericSamplerFailure : public Error {
public:
    explicit GenericSamplerFailure(const std::string& msg) : Error(msg) {}
};

// A closed-form capability is not available for the requested parameterization
// (e.g. tail of a symmetrized gamma with non-integer shape).
class Unsupported : public Error {
public:
    explicit Unsupported(const std::string& msg) : Error(msg) {}
};

}  // namespace subtilt
