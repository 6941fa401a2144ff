#pragma once

#include <complex>
#include <vector>

#include "huygens/dynamics.hpp"
#include "huygens/params.hpp"

namespace huygens::linear {

// Energy-like functional of the summed pendulum coordinates. It is
// non-negative for 0 <= beta <= 1/n and decays as -2*n*sigma*dy^2, which
// kills the symmetric motion but is blind to the anti-phase component.
struct LyapunovSample {
    double E = 0;
    double Edot = 0;
    double t = 0;
};

LyapunovSample lyapunov(const dynamics::State& x,
                        const params::DimensionlessParams& d, double t = 0);

std::vector<LyapunovSample> lyapunov_series(
    const dynamics::Trajectory& traj, const params::DimensionlessParams& d);

// The undamped difference delta = theta1 - theta2 stays a unit-frequency
// oscillation; each pendulum settles onto half of it.
struct AntiphaseAsymptote {
    double amplitude = 0;  // A = sqrt(delta(0)^2 + ddelta(0)^2)
    double phase = 0;      // sin(phi) = delta(0)/A, cos(phi) = ddelta(0)/A
};

AntiphaseAsymptote antiphase_asymptote(double theta1_0, double dtheta1_0,
                                       double theta2_0, double dtheta2_0);

struct ModeSet {
    std::vector<std::complex<double>> eigenvalues;
    dynamics::Model model;
};

// Closed-form spectrum of the generating system (the mu = 0 linear part)
// for the three small-parameter models, in the fixed column order used by
// the poincare engine: pendulum pairs first, frame modes last.
ModeSet generating_modes(dynamics::Model model,
                         const params::PoincareParams& p);

}  // namespace huygens::linear
