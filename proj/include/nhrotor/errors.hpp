#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nhrotor {

// Invalid or inconsistent run configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Fatal numerical condition: overflow, vanishing norm, non-finite amplitudes.
// The CLI maps this to exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A dense or iterative eigensolver failed to meet its convergence contract.
// Carries optional per-iteration diagnostics for post-mortem inspection.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what, std::string diagnostics = {})
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

}  // namespace nhrotor
