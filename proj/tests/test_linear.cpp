#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "huygens/dynamics.hpp"
#include "huygens/linear.hpp"

using namespace huygens;
using namespace huygens::linear;
using dynamics::Model;
using dynamics::State;

namespace {

params::DimensionlessParams fast_decay() {
    params::DimensionlessParams d;
    d.sigma = 1.0;
    d.omega2 = 0.5;
    d.beta = 0.2;
    return d;
}

State six(double a, double b, double c, double dd, double e, double f) {
    State x(6);
    x << a, b, c, dd, e, f;
    return x;
}

// Column-by-column linear part of a small-parameter model at mu = 0.
Eigen::MatrixXd linear_part(Model m, const params::PoincareParams& q) {
    const int dim = dynamics::state_dim(m, q);
    Eigen::MatrixXd A(dim, dim);
    for (int j = 0; j < dim; ++j) {
        State e = State::Zero(dim);
        e[j] = 1.0;
        A.col(j) = dynamics::rhs(m, e, q);
    }
    return A;
}

}  // namespace

TEST_CASE("lyapunov basics") {
    const auto d = fast_decay();
    auto s = lyapunov(State::Zero(6), d);
    CHECK(s.E == 0.0);
    CHECK(s.Edot == 0.0);

    // Edot depends on the frame velocity alone.
    s = lyapunov(six(0.4, -0.2, 0.1, 0.3, 0.2, 0.0), d);
    CHECK(s.Edot == 0.0);
    CHECK(s.E > 0);
}

TEST_CASE("lyapunov frozen value") {
    params::DimensionlessParams d;
    d.sigma = 0.5;
    d.omega2 = 0.25;
    d.beta = 0.2;
    const auto s = lyapunov(six(0.1, 0.2, 0.3, -0.1, 0.05, 0.07), d, 1.5);
    CHECK(s.E == doctest::Approx(0.05065).epsilon(1e-13));
    CHECK(s.Edot == doctest::Approx(-0.0098).epsilon(1e-13));
    CHECK(s.t == 1.5);
}

TEST_CASE("lyapunov domain") {
    auto d = fast_decay();
    d.beta = 0.5;  // exactly 1/n still admissible for the quadratic form
    const auto s = lyapunov(six(0.1, 0.2, 0.3, -0.1, 0.05, 0.07), d);
    CHECK(s.E >= 0);

    d.beta = 0.6;
    CHECK_THROWS_AS(lyapunov(State::Zero(6), d), InvalidParameterError);
    d.beta = -0.1;
    CHECK_THROWS_AS(lyapunov(State::Zero(6), d), InvalidParameterError);
    d.beta = 0.2;
    CHECK_THROWS_AS(lyapunov(State::Zero(5), d), ShapeError);
}

TEST_CASE("E is positive on the symmetric component and blind to anti-phase") {
    const auto d = fast_decay();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        State x(6);
        for (int i = 0; i < 6; ++i) x[i] = u(rng);
        const double th = x[0] + x[2], dth = x[1] + x[3];
        const double mag = std::abs(th) + std::abs(dth) + std::abs(x[4]) +
                           std::abs(x[5]);
        if (mag < 1e-3) continue;
        CHECK(lyapunov(x, d).E > 0);
    }
    // Pure anti-phase motion carries no E at all.
    const auto s = lyapunov(six(0.3, -0.1, -0.3, 0.1, 0, 0), d);
    CHECK(s.E == 0.0);
}

TEST_CASE("finite-difference dE/dt matches the analytic Edot") {
    const auto d = fast_decay();
    dynamics::IntegrateOptions opts;
    opts.sample_interval = 0.005;
    const auto traj = dynamics::integrate(
        Model::Linear, six(0.25, 0.1, -0.1, 0.05, 0.02, -0.03), d, 30.0,
        1e-10, opts);
    const auto series = lyapunov_series(traj, d);
    double worst = 0;
    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
        const double fd = (series[i + 1].E - series[i - 1].E) /
                          (series[i + 1].t - series[i - 1].t);
        worst = std::max(worst, std::abs(fd - series[i].Edot));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("the summed angle dies and E never grows") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> angle(0.1, 0.3);
    std::uniform_real_distribution<double> beta(0.1, 0.3);
    std::uniform_real_distribution<double> damp(0.5, 1.5);
    for (int trial = 0; trial < 3; ++trial) {
        params::DimensionlessParams d;
        d.sigma = damp(rng);
        d.omega2 = 0.5;
        d.beta = beta(rng);
        const State x0 = six(angle(rng), 0, angle(rng), 0, 0, 0);
        const auto traj = dynamics::integrate(Model::Linear, x0, d, 300.0);
        const double sum0 = x0[0] + x0[2];
        const double sumf = traj.x.back()[0] + traj.x.back()[2];
        CHECK(std::abs(sumf) < 1e-4 * std::abs(sum0));

        const auto series = lyapunov_series(traj, d);
        for (std::size_t i = 1; i < series.size(); ++i)
            CHECK(series[i].E <= series[i - 1].E + 1e-9);
    }
}

TEST_CASE("antiphase asymptote closed form") {
    auto r = antiphase_asymptote(0.3, 0.4, 0.0, 0.0);
    CHECK(r.amplitude == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::sin(r.phase) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(std::cos(r.phase) == doctest::Approx(0.8).epsilon(1e-15));

    r = antiphase_asymptote(0.2, -0.1, 0.2, -0.1);  // identical start
    CHECK(r.amplitude == 0.0);
    CHECK(r.phase == 0.0);
}

TEST_CASE("each pendulum settles onto half the difference amplitude") {
    const auto d = fast_decay();
    const auto pred = antiphase_asymptote(0.1, 0, -0.3, 0);
    CHECK(pred.amplitude == doctest::Approx(0.4).epsilon(1e-15));
    const auto traj = dynamics::integrate(Model::Linear,
                                          six(0.1, 0, -0.3, 0, 0, 0), d, 400.0);
    double late = 0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        if (traj.t[i] > 380.0) late = std::max(late, std::abs(traj.x[i][0]));
    CHECK(late == doctest::Approx(pred.amplitude / 2).epsilon(0.01));
}

TEST_CASE("generating modes closed forms") {
    params::PoincareParams q;
    q.mu = 0.01;
    q.a = 5;
    q.sigma = 0;
    q.omega = 0.5;
    q.gamma = 0.1;

    auto ms = generating_modes(Model::ThreeDofSigma, q);
    REQUIRE(ms.eigenvalues.size() == 6);
    CHECK(ms.eigenvalues[4] == std::complex<double>(0, 0.5));
    CHECK(ms.eigenvalues[5] == std::complex<double>(0, -0.5));

    ms = generating_modes(Model::SmallSigma, q);
    CHECK(ms.eigenvalues[4] == std::complex<double>(0, 0.5));

    q.sigma = 0.3;
    q.kappa = 1.5;
    ms = generating_modes(Model::TwoMass, q);
    REQUIRE(ms.eigenvalues.size() == 8);
    int zeros = 0, neg_sigma = 0;
    for (const auto& ev : ms.eigenvalues) {
        if (std::abs(ev) < 1e-15) ++zeros;
        if (std::abs(ev - std::complex<double>(-0.3, 0)) < 1e-15) ++neg_sigma;
    }
    CHECK(zeros == 1);
    CHECK(neg_sigma == 1);

    CHECK_THROWS_AS(generating_modes(Model::Linear, q), InvalidParameterError);
    q.kappa.reset();
    CHECK_THROWS_AS(generating_modes(Model::TwoMass, q),
                    InvalidParameterError);
}

TEST_CASE("mode lists are conjugate-closed with non-positive real parts") {
    params::PoincareParams q;
    q.mu = 0.01;
    q.a = 5;
    q.gamma = 0.1;
    for (double sigma : {0.0, 0.2, 1.4}) {
        for (double omega : {0.1, 0.45}) {
            q.sigma = sigma;
            q.omega = omega;
            q.kappa = 0.9;
            for (Model m :
                 {Model::SmallSigma, Model::ThreeDofSigma, Model::TwoMass}) {
                if (m == Model::SmallSigma && sigma > 0) continue;
                const auto ms = generating_modes(m, q);
                for (const auto& ev : ms.eigenvalues) {
                    CHECK(ev.real() <= 1e-15);
                    bool paired = false;
                    for (const auto& other : ms.eigenvalues)
                        if (std::abs(other - std::conj(ev)) < 1e-12)
                            paired = true;
                    CHECK(paired);
                }
            }
        }
    }
}

TEST_CASE("mode lists annihilate the characteristic polynomial") {
    params::PoincareParams q;
    q.mu = 0;  // expose the pure linear part through rhs
    q.a = 0;
    q.gamma = 0.1;
    struct Case {
        Model m;
        double sigma, omega, kappa;
    };
    const Case cases[] = {
        {Model::SmallSigma, 0.0, 0.37, 0},
        {Model::ThreeDofSigma, 0.3, 0.25, 0},
        {Model::ThreeDofSigma, 1.2, 0.25, 0},  // overdamped frame
        {Model::TwoMass, 0.3, 0.0, 1.5},
    };
    for (const auto& c : cases) {
        q.sigma = c.sigma;
        q.omega = c.omega;
        if (c.m == Model::TwoMass)
            q.kappa = c.kappa;
        else
            q.kappa.reset();
        const auto A = linear_part(c.m, q);
        const Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
        const auto ms = generating_modes(c.m, q);
        REQUIRE(static_cast<int>(ms.eigenvalues.size()) == A.rows());
        for (const auto& ev : ms.eigenvalues) {
            const Eigen::MatrixXcd shifted =
                Ac - ev * Eigen::MatrixXcd::Identity(A.rows(), A.cols());
            CHECK(std::abs(shifted.determinant()) < 1e-10);
        }
    }
}
