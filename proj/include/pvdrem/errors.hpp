#pragma once

#include <stdexcept>
#include <string>

namespace pvdrem {

/// Input violates a documented precondition (bad parameter, bad config).
class domain_error : public std::invalid_argument {
public:
    explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative solve failed to reach its tolerance within budget.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

/// The algebraic constraint of the plant DAE has no solution for the
/// requested current.
class algebraic_constraint_error : public std::runtime_error {
public:
    explicit algebraic_constraint_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pvdrem
