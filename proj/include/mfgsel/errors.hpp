#pragma once

#include <stdexcept>
#include <string>

namespace mfgsel {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of the coupling inverse (delta = 0, s <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class NotPeriodic : public Error {
public:
    using Error::Error;
};

/// Newton iteration hit its cap or could not reduce the residual.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double best_residual, int iterations)
        : Error(what), best_residual_(best_residual), iterations_(iterations) {}
    double best_residual() const noexcept { return best_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double best_residual_;
    int iterations_;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

/// Continuation step shrank below its floor before reaching the target potential.
class ContinuationStalled : public Error {
public:
    ContinuationStalled(const std::string& what, double reached, double last_step)
        : Error(what), reached_(reached), last_step_(last_step) {}
    double reached() const noexcept { return reached_; }
    double last_step() const noexcept { return last_step_; }

private:
    double reached_;
    double last_step_;
};

class DegenerateBase : public Error {
public:
    using Error::Error;
};

class LinearSolveFailure : public Error {
public:
    using Error::Error;
};

class InconsistentRoutes : public Error {
public:
    using Error::Error;
};

class EmptyCatalog : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace mfgsel
