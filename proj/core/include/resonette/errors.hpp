#pragma once

#include <stdexcept>
#include <string>

namespace resonette {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the admissible domain (sector, strip, window).
class DomainError : public Error {
public:
    using Error::Error;
};

// A quadrature or iteration did not reach its tolerance.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate)
        : Error(what + " (estimate " + std::to_string(estimate) + ")"), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

class UnsupportedOrderError : public Error {
public:
    using Error::Error;
};

class LinearAlgebraError : public Error {
public:
    using Error::Error;
};

// z is numerically a resonance: the effective Grushin block is singular.
class SingularSystemError : public LinearAlgebraError {
public:
    using LinearAlgebraError::LinearAlgebraError;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class LadderAbort : public Error {
public:
    LadderAbort(const std::string& what, std::string dump) : Error(what), dump_(std::move(dump)) {}
    const std::string& dump() const noexcept { return dump_; }

private:
    std::string dump_;
};

}  // namespace resonette
