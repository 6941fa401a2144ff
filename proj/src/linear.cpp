#include "huygens/linear.hpp"

#include <cmath>

namespace huygens::linear {

using dynamics::Model;
using dynamics::State;

LyapunovSample lyapunov(const State& x, const params::DimensionlessParams& d,
                        double t) {
    const int n = d.n;
    // beta = 1/n is admissible here (the quadratic form stays non-negative)
    // even though the dynamics itself needs beta < 1/n.
    if (!(d.beta >= 0) || !(d.beta <= 1.0 / n))
        throw InvalidParameterError("lyapunov needs 0 <= beta <= 1/n");
    if (x.size() != 2 * n + 2)
        throw ShapeError("lyapunov expects the linear-model state layout");

    double th = 0, dth = 0;
    for (int i = 0; i < n; ++i) {
        th += x[2 * i];
        dth += x[2 * i + 1];
    }
    const double y = x[2 * n], dy = x[2 * n + 1];

    LyapunovSample s;
    s.t = t;
    s.E = d.beta * th * th + (d.beta - n * d.beta * d.beta) * dth * dth +
          n * d.omega2 * y * y +
          n * (d.beta * dth + dy) * (d.beta * dth + dy);
    s.Edot = -2.0 * n * d.sigma * dy * dy;
    return s;
}

std::vector<LyapunovSample> lyapunov_series(
    const dynamics::Trajectory& traj, const params::DimensionlessParams& d) {
    std::vector<LyapunovSample> out;
    out.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        out.push_back(lyapunov(traj.x[i], d, traj.t[i]));
    return out;
}

AntiphaseAsymptote antiphase_asymptote(double theta1_0, double dtheta1_0,
                                       double theta2_0, double dtheta2_0) {
    const double delta = theta1_0 - theta2_0;
    const double ddelta = dtheta1_0 - dtheta2_0;
    AntiphaseAsymptote out;
    out.amplitude = std::hypot(delta, ddelta);
    out.phase = out.amplitude > 0 ? std::atan2(delta, ddelta) : 0.0;
    return out;
}

ModeSet generating_modes(Model model, const params::PoincareParams& p) {
    using C = std::complex<double>;
    p.validate();
    ModeSet out;
    out.model = model;
    out.eigenvalues = {C(0, 1), C(0, 1), C(0, -1), C(0, -1)};
    switch (model) {
        case Model::SmallSigma:
            out.eigenvalues.push_back(C(0, p.omega));
            out.eigenvalues.push_back(C(0, -p.omega));
            break;
        case Model::ThreeDofSigma: {
            const C root = std::sqrt(
                C(p.sigma * p.sigma - 4.0 * p.omega * p.omega, 0));
            out.eigenvalues.push_back(-0.5 * (p.sigma - root));
            out.eigenvalues.push_back(-0.5 * (p.sigma + root));
            break;
        }
        case Model::TwoMass: {
            if (!p.kappa)
                throw InvalidParameterError("two-mass modes need kappa");
            const C root =
                std::sqrt(C(p.sigma * p.sigma - 8.0 * (*p.kappa), 0));
            out.eigenvalues.push_back(-0.5 * (p.sigma - root));
            out.eigenvalues.push_back(-0.5 * (p.sigma + root));
            out.eigenvalues.push_back(C(-p.sigma, 0));
            out.eigenvalues.push_back(C(0, 0));
            break;
        }
        default:
            throw InvalidParameterError(
                "generating modes exist for the small-parameter models only");
    }
    return out;
}

}  // namespace huygens::linear
