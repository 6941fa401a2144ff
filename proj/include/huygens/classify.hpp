#pragma once

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "huygens/dynamics.hpp"
#include "huygens/errors.hpp"

namespace huygens::classify {

enum class Regime { InPhase, AntiPhase, Beats, Quenched, Unsettled };

const char* to_string(Regime regime);

struct Tolerances {
    double phase_tol = 0.05;   // rad of slack around 0 and pi
    double amp_tol = 0.02;     // relative envelope sway around the tail mean
    double quench_tol = 1e-3;  // envelope level that counts as dead
    double beat_depth = 0.3;   // drop below the running peak that counts as beats
};

struct SyncRegimeReport {
    Regime regime = Regime::Unsettled;
    std::optional<double> settle_time;
    std::array<double, 2> asymptotic_amplitude{0.0, 0.0};
    double measured_period = 0.0;  // 0 when too few crossings to measure
    double period_std_error = 0.0;
    double phase_difference_final = 0.0;  // wrapped into (-pi, pi]
    // Deepest fractional drop of a cycle-averaged envelope below its own
    // running maximum, over the whole trajectory.
    double beat_depth = 0.0;
    bool beats = false;  // beat_depth exceeded the tolerance before settling
};

// Quadrature amplitude sqrt(theta_i^2 + dtheta_i^2) per sample. Exact for
// unit-frequency harmonic motion, which every settled state here is up to
// O(mu); i is the zero-based pendulum index.
std::vector<double> envelope(const dynamics::Trajectory& traj, int i);

struct PhaseSeries {
    std::vector<double> t;
    std::vector<double> value;  // unwrapped phi1 - phi2 where defined
    std::vector<char> defined;  // 0 where either amplitude is below 1e-8
};

// Instantaneous phases phi_i = atan2(-dtheta_i, theta_i), returned as the
// unwrapped difference phi_1 - phi_2. Unwrapping assumes less than half a
// turn of relative slip per sample, which the default sampling (200 per
// cycle) exceeds by two orders of magnitude.
PhaseSeries phase_difference(const dynamics::Trajectory& traj);

struct PeriodEstimate {
    double period = 0.0;
    double std_error = 0.0;  // standard error of the mean spacing
    int crossings = 0;
};

// Mean spacing of upward zero crossings of theta_1 inside [t_start, t_end],
// crossings located by linear interpolation between samples. Fewer than ten
// crossings raise InsufficientDataError.
PeriodEstimate measure_period(
    const dynamics::Trajectory& traj, double t_start = 0.0,
    double t_end = std::numeric_limits<double>::infinity());

// Total classification: settle detection, regime label, beats flag, tail
// amplitudes and period. Settle and beat tests run on envelopes averaged
// over one nominal cycle, because the raw quadrature envelope of a settled
// strong-escapement state ripples by a few percent within every cycle.
// Trajectories should cover at least ~50 nominal cycles for the tail
// statistics to mean anything; short or ambiguous input degrades to
// Unsettled rather than throwing.
SyncRegimeReport detect_regime(const dynamics::Trajectory& traj,
                               const Tolerances& tols = {});

}  // namespace huygens::classify
