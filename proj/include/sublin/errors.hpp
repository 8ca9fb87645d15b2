#pragma once

#include <stdexcept>
#include <string>

namespace sublin {

/// Comparison tolerance for equality and feasibility checks.
inline constexpr double kTolerance = 1e-12;
/// Tolerance for optimization residuals (envelope minima, orthogonality).
inline constexpr double kResidualTolerance = 1e-9;
/// Row-sum tolerance accepted when loading models from files.
inline constexpr double kLoadTolerance = 1e-9;

/// Invalid model, event, random variable or argument.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Objects built on different sample spaces were combined.
class SpaceMismatch : public ModelError {
public:
    SpaceMismatch() : ModelError("objects live on different sample spaces") {}
};

/// An enumeration would exceed its configured work budget.
class GuardExceeded : public std::runtime_error {
public:
    GuardExceeded(const std::string& what, double work, double guard)
        : std::runtime_error(what + ": " + std::to_string(work) + " work units exceed guard " +
                             std::to_string(guard)),
          work_(work), guard_(guard) {}

    double work() const noexcept { return work_; }
    double guard() const noexcept { return guard_; }

private:
    double work_;
    double guard_;
};

/// A hypothesis required by an operation does not hold (e.g. uncorrelatedness).
class HypothesisViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sublin
