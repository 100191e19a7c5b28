#pragma once

#include <stdexcept>
#include <string>

namespace solvable {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Result not representable as a finite double.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// An iterative or adaptive procedure ran out of budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double worst_lo = 0.0, double worst_hi = 0.0)
        : Error(what), worst_lo_(worst_lo), worst_hi_(worst_hi) {}

    /// Subinterval carrying the largest error estimate when the budget ran out.
    double worst_lo() const noexcept { return worst_lo_; }
    double worst_hi() const noexcept { return worst_hi_; }

private:
    double worst_lo_;
    double worst_hi_;
};

/// A precondition of a construction does not hold (bound states, non-positive solutions, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// An integrability condition required by a construction fails.
class IntegrabilityError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters for a catalog entry or engine.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// ODE integration could not proceed (step underflow near a singularity).
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double reached) : Error(what), reached_(reached) {}
    double reached() const noexcept { return reached_; }

private:
    double reached_;
};

/// A composition level failed verification while iterating.
class IterationError : public Error {
public:
    IterationError(const std::string& what, int level) : Error(what), level_(level) {}
    int level() const noexcept { return level_; }

private:
    int level_;
};

}  // namespace solvable
