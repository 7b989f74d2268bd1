#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace critsing {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid argument for a pointwise evaluation (non-positive singular
/// argument, parameter outside its admissible range, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Geometric precondition violated (cutoff ball exits the domain, ...).
struct GeometryError : Error {
    using Error::Error;
};

/// An iterative solver ran out of iterations or stalled above tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

/// A positivity-preserving iteration could not maintain its lower barrier.
struct PositivityLossError : Error {
    using Error::Error;
};

/// Direct linear solve hit a (numerically) singular pivot.
struct SingularSystemError : Error {
    using Error::Error;
};

/// Adaptive quadrature failed to reach its tolerance.
struct QuadratureError : Error {
    using Error::Error;
};

/// The v + z construction failed the nodewise supersolution inequality.
/// Carries the violating node indices; signals lambda too large for the
/// explicit construction.
struct NotSupersolutionError : Error {
    std::vector<int> violating_nodes;
    NotSupersolutionError(const std::string& what, std::vector<int> nodes)
        : Error(what), violating_nodes(std::move(nodes)) {}
};

/// Monotone iteration left its certified sub/supersolution bracket.
struct BracketViolationError : Error {
    using Error::Error;
};

/// The eps -> 0 schedule ran out of stages before stabilizing.
struct ScheduleExhaustedError : Error {
    using Error::Error;
};

/// Every eps-stage of the first-solution pipeline diverged; interpreted
/// as lambda at or beyond the solvable range.
struct NoSolutionEvidence : Error {
    using Error::Error;
};

/// Sphere-infimum estimates straddle the classification tolerance.
struct ClassificationAmbiguous : Error {
    using Error::Error;
};

/// Bubble path scan found a sample at or above the compactness threshold.
struct MarginViolation : Error {
    double t = 0.0, eps = 0.0;
    MarginViolation(const std::string& what, double t_, double eps_)
        : Error(what), t(t_), eps(eps_) {}
};

/// Mountain-pass deformation stalled with the peak at or above the
/// threshold; the strict certificate 0 < gamma0 < threshold failed.
struct StallAboveThreshold : Error {
    using Error::Error;
};

/// Annulus descent collapsed to the origin, contradicting the ZA verdict.
struct EscapeToZero : Error {
    using Error::Error;
};

/// Local-minimum probe found energy decreases beyond slack.
struct ProbeFailure : Error {
    using Error::Error;
};

/// A solve succeeded above a certified failure during bisection.
struct InconsistentBracket : Error {
    using Error::Error;
};

/// Configuration file could not be parsed or failed validation.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace critsing
