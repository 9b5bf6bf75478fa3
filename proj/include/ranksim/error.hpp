#pragma once

#include <stdexcept>
#include <string>

namespace ranksim {

/// Parameters or configuration violate a stated constraint.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameters fall outside the regime in which a closed form or procedure
/// applies (e.g. a stationary law requested for an unstable system).
class RegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative numerical routine did not reach its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace ranksim
