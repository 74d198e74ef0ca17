#pragma once

#include <stdexcept>
#include <string>

namespace frachs {

/// Iterative solver ran out of iterations. Carries the last residual.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Iterate left the admissible set (lost positivity, non-finite values).
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A multiplier that should be inverted has a nonpositive entry.
class SingularOperatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigensolver failed to converge or produced an inaccurate pair.
class EigensolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace frachs
