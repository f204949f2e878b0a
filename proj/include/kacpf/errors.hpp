#pragma once

#include <stdexcept>
#include <string>

namespace kacpf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wrong shape: odd dimension, mismatched grids, non-square input.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf entries or otherwise malformed numeric input.
class InputError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of the evaluator.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Problem size above a configured cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Matrix singular (or too close to it) for the requested operation.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Numerical integration or Monte Carlo did not reach the requested tolerance.
class ToleranceError : public Error {
public:
    ToleranceError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// An internal cross-check failed (e.g. an assembled matrix is not antisymmetric).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Eigen-solver failure on a sampled matrix; samplers catch this and resample.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace kacpf
