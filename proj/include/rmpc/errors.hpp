#pragma once

#include <stdexcept>
#include <string>

namespace rmpc {

/// Raised when a numerical operation cannot be completed reliably
/// (singular innovation covariance, non-finite matrix exponential,
/// failed bisection, loss of positive definiteness).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a simulated trajectory leaves the representable range,
/// signalling an unstable closed loop.
struct DivergenceError : NumericalError {
    explicit DivergenceError(const std::string& what) : NumericalError(what) {}
};

/// Raised when an optimization problem has no unique minimizer
/// (singular normal-equations matrix).
struct IllPosedError : std::runtime_error {
    explicit IllPosedError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on malformed configuration files or unknown override keys.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rmpc
