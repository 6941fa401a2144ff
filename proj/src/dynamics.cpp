#include "huygens/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

namespace huygens::dynamics {

namespace {

using params::DimensionlessParams;
using params::PoincareParams;

const DimensionlessParams& dimensionless_of(const ModelParams& p,
                                            const char* model_name) {
    if (const auto* d = std::get_if<DimensionlessParams>(&p)) {
        d->validate();
        return *d;
    }
    throw InvalidParameterError(std::string(model_name) +
                                " takes dimensionless parameters");
}

const PoincareParams& poincare_of(const ModelParams& p,
                                  const char* model_name) {
    if (const auto* q = std::get_if<PoincareParams>(&p)) {
        q->validate();
        return *q;
    }
    throw InvalidParameterError(std::string(model_name) +
                                " takes poincare parameters");
}

// Frame-coupled pendulum equations. The accelerations are implicit through
// the beta * sum(theta'' cos theta) term, so each call solves the
// (n+1) x (n+1) mass system. `full` keeps sin/cos and the escapement;
// `escapement` off drops every nonlinear source (the Linear model).
State coupled_rhs(const State& x, const DimensionlessParams& d, bool full,
                  bool escapement) {
    const int n = d.n;
    Eigen::MatrixXd Mm = Eigen::MatrixXd::Identity(n + 1, n + 1);
    Eigen::VectorXd b(n + 1);
    double frame_src = -d.sigma * x[2 * n + 1] - d.omega2 * x[2 * n];
    for (int i = 0; i < n; ++i) {
        const double th = x[2 * i], dth = x[2 * i + 1];
        const double s = full ? std::sin(th) : th;
        const double c = full ? std::cos(th) : 1.0;
        const double drive =
            escapement ? d.epsilon * (d.gamma * d.gamma - th * th) * dth : 0.0;
        Mm(i, n) = c;
        Mm(n, i) = d.beta * c;
        b[i] = drive - s;
        if (escapement) frame_src += d.beta * dth * dth * s;
    }
    b[n] = frame_src;
    const Eigen::VectorXd acc = Mm.partialPivLu().solve(b);

    State dx(2 * n + 2);
    for (int i = 0; i < n; ++i) {
        dx[2 * i] = x[2 * i + 1];
        dx[2 * i + 1] = acc[i];
    }
    dx[2 * n] = x[2 * n + 1];
    dx[2 * n + 1] = acc[n];
    return dx;
}

// x' = A x + mu * Phi(x) for the one-frame small-parameter models. The
// frame damping enters through A for ThreeDofSigma but through Phi (as
// b = sigma/mu) for SmallSigma, where sigma is itself of order mu.
State one_frame_mu_rhs(const State& x, const PoincareParams& q,
                       bool sigma_in_A) {
    const int n = q.n;
    const double om2 = q.omega * q.omega;
    const double y = x[2 * n], dy = x[2 * n + 1];

    double b = 0;
    if (!sigma_in_A) {
        if (q.mu > 0) {
            b = q.sigma / q.mu;
        } else if (q.sigma != 0) {
            throw InvalidParameterError(
                "small-sigma model needs mu > 0 when sigma > 0");
        }
    }

    double F = sigma_in_A ? -q.n * (q.sigma * dy + om2 * y)
                          : -b * dy - q.n * om2 * y;
    for (int i = 0; i < n; ++i)
        F += (1.0 + x[2 * i + 1] * x[2 * i + 1]) * x[2 * i];

    State dx(2 * n + 2);
    for (int i = 0; i < n; ++i) {
        const double th = x[2 * i], dth = x[2 * i + 1];
        const double Fi = q.a * (q.gamma * q.gamma - th * th) * dth;
        dx[2 * i] = dth;
        dx[2 * i + 1] = -th + om2 * y + (sigma_in_A ? q.sigma * dy : 0.0) +
                        q.mu * (Fi - F);
    }
    dx[2 * n] = dy;
    dx[2 * n + 1] = -om2 * y - (sigma_in_A ? q.sigma * dy : 0.0) + q.mu * F;
    return dx;
}

State two_mass_rhs(const State& x, const PoincareParams& q) {
    const double kp = *q.kappa;
    const double th1 = x[0], dth1 = x[1], th2 = x[2], dth2 = x[3];
    const double y1 = x[4], dy1 = x[5], y2 = x[6], dy2 = x[7];

    const double F1 = -q.sigma * dy1 + kp * (y2 - y1) + th1 * (1.0 + dth1 * dth1);
    const double F2 = -q.sigma * dy2 - kp * (y2 - y1) + th2 * (1.0 + dth2 * dth2);
    const double e1 = q.a * (q.gamma * q.gamma - th1 * th1) * dth1;
    const double e2 = q.a * (q.gamma * q.gamma - th2 * th2) * dth2;

    State dx(8);
    dx[0] = dth1;
    dx[1] = -th1 + kp * (y1 - y2) + q.sigma * dy1 + q.mu * (e1 - F1);
    dx[2] = dth2;
    dx[3] = -th2 - kp * (y1 - y2) + q.sigma * dy2 + q.mu * (e2 - F2);
    dx[4] = dy1;
    dx[5] = -kp * (y1 - y2) - q.sigma * dy1 + q.mu * F1;
    dx[6] = dy2;
    dx[7] = kp * (y1 - y2) - q.sigma * dy2 + q.mu * F2;
    return dx;
}

int pendulum_count(const ModelParams& p) {
    return std::visit([](const auto& v) { return v.n; }, p);
}

}  // namespace

int state_dim(Model model, const ModelParams& p) {
    if (model == Model::TwoMass) return 8;
    return 2 * pendulum_count(p) + 2;
}

State rhs(Model model, const State& x, const ModelParams& p) {
    if (x.size() != state_dim(model, p))
        throw ShapeError("state has dimension " + std::to_string(x.size()) +
                         ", model expects " +
                         std::to_string(state_dim(model, p)));
    switch (model) {
        case Model::FullNonlinear:
            return coupled_rhs(x, dimensionless_of(p, "full model"), true, true);
        case Model::Dimensionless:
            return coupled_rhs(x, dimensionless_of(p, "dimensionless model"),
                               false, true);
        case Model::Linear:
            return coupled_rhs(x, dimensionless_of(p, "linear model"), false,
                               false);
        case Model::SmallSigma:
            return one_frame_mu_rhs(x, poincare_of(p, "small-sigma model"),
                                    false);
        case Model::ThreeDofSigma:
            return one_frame_mu_rhs(x, poincare_of(p, "three-dof model"), true);
        case Model::TwoMass: {
            const auto& q = poincare_of(p, "two-mass model");
            if (!q.kappa)
                throw InvalidParameterError("two-mass model needs kappa");
            if (q.n != 2)
                throw InvalidParameterError("two-mass model is defined for n = 2");
            return two_mass_rhs(x, q);
        }
    }
    throw InvalidParameterError("unknown model");
}

void project_rigid_body(State& x, const params::PoincareParams& p) {
    if (!p.kappa)
        throw InvalidParameterError("rigid-body projection applies to the "
                                    "two-mass model only");
    if (!(p.sigma > 0))
        throw InvalidParameterError("rigid-body projection needs sigma > 0");
    if (x.size() != 8)
        throw ShapeError("rigid-body projection expects an 8-state vector");
    const double xi =
        (p.sigma * (x[4] + x[6]) + x[5] + x[7]) / (2.0 * p.sigma);
    x[4] -= xi;
    x[6] -= xi;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;

// Error weights: difference between the 5th and the embedded 4th order rows.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// Dense-output weights for the quartic interpolant.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

struct DenseStep {
    double t0 = 0, h = 0;
    State r1, r2, r3, r4, r5;

    State eval(double t) const {
        const double th = (t - t0) / h, th1 = 1.0 - th;
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
};

}  // namespace

Trajectory integrate(Model model, const State& x0, const ModelParams& p,
                     double t_end, double tol,
                     const IntegrateOptions& opts) {
    if (!(t_end > 0) || !std::isfinite(t_end))
        throw InvalidParameterError("t_end must be positive and finite");
    if (!(tol > 0))
        throw InvalidParameterError("tolerance must be positive");
    if (opts.sample_interval <= 0)
        throw InvalidParameterError("sample_interval must be positive");
    if (x0.size() != state_dim(model, p))
        throw ShapeError("initial state has dimension " +
                         std::to_string(x0.size()) + ", model expects " +
                         std::to_string(state_dim(model, p)));

    const auto f = [&](const State& x) { return rhs(model, x, p); };
    const int dim = static_cast<int>(x0.size());
    const bool fixed = opts.fixed_step > 0;

    Trajectory traj;
    traj.model = model;
    traj.n = pendulum_count(p);
    traj.t.push_back(0.0);
    traj.x.push_back(x0);

    double t = 0;
    State y = x0;
    State k1 = f(y);
    double h = fixed ? opts.fixed_step : std::min(0.01, t_end / 10.0);
    bool rejected = false;
    long step_count = 0;
    std::size_t next_sample = 1;  // samples sit at multiples of the interval

    State k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), y1(dim),
        err_vec(dim);

    while (t < t_end) {
        if (++step_count > opts.max_steps)
            throw IntegrationFailure("step budget exhausted", t);
        if (!fixed && h < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationFailure("step size underflow", t);
        bool last = false;
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }

        k2 = f(y + h * (a21 * k1));
        k3 = f(y + h * (a31 * k1 + a32 * k2));
        k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = f(y1);

        double err = 0;
        if (!fixed) {
            err_vec =
                h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            for (int i = 0; i < dim; ++i) {
                const double sc =
                    tol + tol * std::max(std::abs(y[i]), std::abs(y1[i]));
                const double q = err_vec[i] / sc;
                err += q * q;
            }
            err = std::sqrt(err / dim);
            if (!std::isfinite(err)) err = 2.0;  // force rejection
        }

        if (fixed || err <= 1.0) {
            DenseStep dense;
            dense.t0 = t;
            dense.h = h;
            dense.r1 = y;
            dense.r2 = y1 - y;
            dense.r3 = h * k1 - dense.r2;
            dense.r4 = dense.r2 - h * k7 - dense.r3;
            dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 +
                            d7 * k7);

            const double t_new = last ? t_end : t + h;
            while (true) {
                const double ts = next_sample * opts.sample_interval;
                if (ts > t_new + 1e-12 * std::max(1.0, t_new) || ts > t_end)
                    break;
                traj.t.push_back(ts);
                traj.x.push_back(dense.eval(ts));
                ++next_sample;
            }

            t = t_new;
            y = y1;
            k1 = k7;  // first-same-as-last
            if (!fixed) {
                const double fac =
                    err > 0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2,
                                         rejected ? 1.0 : 10.0)
                            : (rejected ? 1.0 : 10.0);
                h *= fac;
                rejected = false;
            }
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
            rejected = true;
        }
    }

    // The integration lands on t_end exactly; append it unless the sample
    // grid already did.
    if (traj.t.back() < t_end - 1e-12 * std::max(1.0, t_end)) {
        traj.t.push_back(t_end);
        traj.x.push_back(y);
    } else {
        traj.t.back() = t_end;
        traj.x.back() = y;
    }
    return traj;
}

void write_csv(std::ostream& out, const Trajectory& traj) {
    const int dim = traj.dim();
    if (dim == 0) throw ShapeError("cannot write an empty trajectory");

    out << 't';
    for (int i = 1; i <= traj.n; ++i)
        out << ",theta" << i << ",dtheta" << i;
    out << ",y,dy";
    if (dim == 2 * traj.n + 4) out << ",y2,dy2";  // two-mass layout
    out << '\n';

    char buf[32];
    for (std::size_t r = 0; r < traj.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%.16e", traj.t[r]);
        out << buf;
        for (int c = 0; c < dim; ++c) {
            std::snprintf(buf, sizeof buf, ",%.16e", traj.x[r][c]);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace huygens::dynamics
