#pragma once

#include <stdexcept>
#include <string>

namespace smalltime {

// Argument outside the mathematical domain of an operation (s <= 0, t > T, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Division by a vanishing second derivative or diagonal entry.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A model or utility violates one of its validity assumptions.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iterative solver refused the system or ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}
    [[nodiscard]] double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

// Finite-difference grid cannot support the requested stencils.
class StencilError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Monte-Carlo work request exceeds the configured path-step budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smalltime
