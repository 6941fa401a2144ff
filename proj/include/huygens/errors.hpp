#pragma once

#include <stdexcept>
#include <string>

namespace huygens {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameterError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Adaptive integration gave up (step underflow or non-finite state).
// last_good_time is the end of the last accepted step.
struct IntegrationFailure : Error {
    double last_good_time;
    IntegrationFailure(const std::string& msg, double t)
        : Error(msg), last_good_time(t) {}
};

// Coalescing eigenvalues: the matrix is defective or within the guard band
// of a defective configuration, so no reliable eigenbasis exists.
struct DegeneracyError : Error { using Error::Error; };

// An eigenvalue sits near, but not exactly on, a resonant multiple of the
// base frequency; grouping would be ambiguous.
struct ResonanceWarning : Error { using Error::Error; };

// The secondary special group is non-empty; its stability machinery is not
// implemented and silently ignoring it would mis-analyze the system.
struct SecondaryGroupError : Error { using Error::Error; };

struct NoSolutionError : Error { using Error::Error; };
struct TrivialSolutionError : Error { using Error::Error; };
struct DegenerateSolutionError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };

}  // namespace huygens
