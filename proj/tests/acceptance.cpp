#include <chrono>
#include <cmath>
#include <cstdarg>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "huygens/classify.hpp"
#include "huygens/dynamics.hpp"
#include "huygens/errors.hpp"
#include "huygens/figures.hpp"
#include "huygens/linear.hpp"
#include "huygens/params.hpp"
#include "huygens/poincare.hpp"

// End-to-end acceptance checks: one line per criterion, non-zero exit when
// any of them fails. Tolerances are pinned in the criteria themselves.

namespace {

using C = std::complex<double>;
using huygens::dynamics::Model;
using huygens::poincare::Regime;

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

huygens::params::PoincareParams pp(double mu, double a, double sigma,
                                   double omega, double gamma,
                                   double kappa = 0) {
    huygens::params::PoincareParams q;
    q.mu = mu;
    q.a = a;
    q.sigma = sigma;
    q.omega = omega;
    q.gamma = gamma;
    if (kappa > 0) q.kappa = kappa;
    return q;
}

// Bierman-style clock frame: the oak beam parameters that every heavy-frame
// run in the repository derives from.
huygens::params::PhysicalParams clock_frame() {
    huygens::params::PhysicalParams ph;
    ph.m = 0.158;
    ph.M = 11.856;
    ph.l = 0.269;
    ph.g = 9.81;
    ph.c = 11.856;
    ph.k = 1.186;
    ph.gamma = 0.122;
    ph.e = 5.047 * ph.m * ph.g * ph.l;
    return ph;
}

huygens::dynamics::Trajectory simulate(Model model,
                                       const huygens::dynamics::ModelParams& p,
                                       double th1, double th2, double cycles,
                                       double tol = 1e-9) {
    const int dim = huygens::dynamics::state_dim(model, p);
    huygens::dynamics::State x0 = huygens::dynamics::State::Zero(dim);
    x0[0] = th1;
    x0[2] = th2;
    return huygens::dynamics::integrate(model, x0, p, cycles * kTwoPi, tol);
}

std::string fmt(const char* spec, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, spec);
    std::vsnprintf(buf, sizeof buf, spec, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool ok = false;
    std::string detail;
};

// Greedy nearest-neighbour pairing between two root sets.
bool roots_match(std::vector<C> got, const std::vector<C>& want, double tol) {
    if (got.size() != want.size()) return false;
    for (const C& w : want) {
        std::size_t best = got.size();
        double dist = tol;
        for (std::size_t i = 0; i < got.size(); ++i)
            if (std::abs(got[i] - w) < dist) {
                dist = std::abs(got[i] - w);
                best = i;
            }
        if (best == got.size()) return false;
        got.erase(got.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return true;
}

std::vector<C> cubic_roots(double lin, double b, double c) {
    const C disc = std::sqrt(C(b * b / 4.0 - c, 0.0));
    return {C(lin, 0.0), -b / 2.0 + disc, -b / 2.0 - disc};
}

huygens::poincare::PoincareSolution solve_regime(
    const huygens::poincare::PreparedSystem& ps, Regime regime, double r0) {
    huygens::poincare::SolveSeed seed;
    seed.r0 = r0;
    seed.phi0 = regime == Regime::InPhase ? 0.0 : kPi;
    return huygens::poincare::solve_amplitudes(ps, seed);
}

// Engine-side regime solve wrapped into an existence answer.
bool engine_exists(const huygens::poincare::PreparedSystem& ps, Regime regime,
                   double r0, huygens::poincare::PoincareSolution* out) {
    try {
        auto sol = solve_regime(ps, regime, r0);
        if (sol.regime != regime) return false;
        if (out) *out = std::move(sol);
        return true;
    } catch (const huygens::NoSolutionError&) {
        return false;
    } catch (const huygens::TrivialSolutionError&) {
        return false;
    } catch (const huygens::DegenerateSolutionError&) {
        return false;
    }
}

// --- criterion 1: heavy-frame anti-phase amplitude ---------------------

Outcome criterion1() {
    const auto start = std::chrono::steady_clock::now();
    const auto d = huygens::params::to_dimensionless(clock_frame());
    const auto q = huygens::params::to_poincare(d);
    const auto traj = simulate(Model::ThreeDofSigma, q, 0.1, -0.3, 200);
    const auto rep = huygens::classify::detect_regime(traj);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    const double target = 2.0 * q.gamma;  // 0.244
    const double tol = (0.02 + 5.0 * q.mu) * target;
    const double d1 = std::abs(rep.asymptotic_amplitude[0] - target);
    const double d2 = std::abs(rep.asymptotic_amplitude[1] - target);
    const bool ok = rep.regime == huygens::classify::Regime::AntiPhase &&
                    d1 <= tol && d2 <= tol && wall < 10.0;
    return {ok, fmt("regime=%s amp=%.6f/%.6f target=%.3f tol=%.4f wall=%.2fs",
                    huygens::classify::to_string(rep.regime),
                    rep.asymptotic_amplitude[0], rep.asymptotic_amplitude[1],
                    target, tol, wall)};
}

// --- criterion 2: in-phase amplitude at the reference point ------------

Outcome criterion2() {
    const auto q = pp(0.01, 5.0, 0.1, 0.0, 0.5);
    const double target = 0.89973541084243724;
    const auto traj = simulate(Model::ThreeDofSigma, q, 0.8, 0.8, 300);
    const auto rep = huygens::classify::detect_regime(traj);
    const double tol = (0.02 + 5.0 * q.mu) * target;
    const double d1 = std::abs(rep.asymptotic_amplitude[0] - target);
    const double d2 = std::abs(rep.asymptotic_amplitude[1] - target);
    const bool ok = rep.regime == huygens::classify::Regime::InPhase &&
                    d1 <= tol && d2 <= tol;
    return {ok, fmt("regime=%s amp=%.6f/%.6f target=%.6f tol=%.4f",
                    huygens::classify::to_string(rep.regime),
                    rep.asymptotic_amplitude[0], rep.asymptotic_amplitude[1],
                    target, tol)};
}

// --- criterion 3: period deficit scales with mu -------------------------

Outcome criterion3() {
    const double mus[3] = {0.005, 0.01, 0.02};
    double deficit[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        const auto q = pp(mus[i], 5.0, 0.1, 0.0, 0.5);
        const auto traj =
            simulate(Model::ThreeDofSigma, q, 0.8, 0.8, 250, 1e-10);
        const auto rep = huygens::classify::detect_regime(traj);
        if (rep.regime != huygens::classify::Regime::InPhase)
            return {false, fmt("mu=%.3f settled to %s", mus[i],
                               huygens::classify::to_string(rep.regime))};
        deficit[i] = kTwoPi - rep.measured_period;
    }
    const double slope = (deficit[2] - deficit[0]) / (mus[2] - mus[0]);
    const double want = 7.4799825085471268;  // 2 pi delta1 at this point
    const double rel = std::abs(slope - want) / want;

    const auto qa = pp(0.013, 5.0, 0.1, 0.0, 0.5);
    const auto anti =
        simulate(Model::ThreeDofSigma, qa, 0.45, -0.45, 250, 1e-10);
    const auto rep = huygens::classify::detect_regime(anti);
    const double anti_err = std::abs(rep.measured_period - kTwoPi);

    const bool ok = rel <= 0.10 &&
                    rep.regime == huygens::classify::Regime::AntiPhase &&
                    anti_err <= 5e-3;
    return {ok, fmt("slope=%.4f want=%.4f rel=%.3f; anti |T-2pi|=%.2e",
                    slope, want, rel, anti_err)};
}

// --- criterion 4: averaged equations vs closed forms, random points ----

Outcome criterion4() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937 rng(4242u);
    std::uniform_real_distribution<double> us(0.05, 0.5), ua(1.0, 10.0),
        ug(0.2, 0.8), uo(0.05, 0.45), uk(0.75, 3.0), um(0.005, 0.02);
    int compared = 0, bad = 0;
    std::string first_bad;
    for (int i = 0; i < 100; ++i) {
        const Model model = i % 3 == 0   ? Model::SmallSigma
                            : i % 3 == 1 ? Model::ThreeDofSigma
                                         : Model::TwoMass;
        const bool two_mass = model == Model::TwoMass;
        const auto q = pp(um(rng), ua(rng), us(rng), two_mass ? 0.0 : uo(rng),
                          ug(rng), two_mass ? uk(rng) : 0.0);
        try {
            const auto preds = huygens::poincare::closed_form_regimes(q, model);
            const auto ps = huygens::poincare::prepare(model, q);
            for (const auto& p : preds) {
                huygens::poincare::PoincareSolution sol;
                const double r0 = p.exists ? p.amplitude / 2.0 : q.gamma;
                const bool exists = engine_exists(ps, p.regime, r0, &sol);
                ++compared;
                std::string why;
                if (exists != p.exists) {
                    why = "existence";
                } else if (exists) {
                    const double da = std::abs(2.0 * sol.r - p.amplitude) /
                                      std::max(1.0, p.amplitude);
                    const double dd = std::abs(sol.delta1 - p.delta1) /
                                      std::max(1.0, std::abs(p.delta1));
                    if (da > 1e-8 || dd > 1e-8) why = "value";
                    else if (p.stable && *p.stable != sol.stable)
                        why = "stability";
                }
                if (!why.empty()) {
                    ++bad;
                    if (first_bad.empty())
                        first_bad = fmt(
                            " first=%s(point %d, %s, sigma=%.3f a=%.3f "
                            "gamma=%.3f)",
                            why.c_str(), i,
                            huygens::poincare::to_string(p.regime), q.sigma,
                            q.a, q.gamma);
                }
            }
        } catch (const huygens::Error& e) {
            ++bad;
            if (first_bad.empty())
                first_bad = fmt(" point %d threw: %s", i, e.what());
        }
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool ok = bad == 0 && wall < 30.0;
    return {ok, fmt("%d comparisons, %d mismatches, wall=%.2fs%s", compared,
                    bad, wall, first_bad.c_str())};
}

// --- criterion 5: engine bisection lands on the analytic thresholds ----

Outcome criterion5() {
    // stability boundary at a=5: flip of the in-phase stability flag
    const auto stable_at = [](double sigma) {
        const auto q = pp(0.01, 5.0, sigma, 0.0, 0.5);
        const auto ps = huygens::poincare::prepare(Model::ThreeDofSigma, q);
        const auto preds =
            huygens::poincare::closed_form_regimes(q, Model::ThreeDofSigma);
        huygens::poincare::PoincareSolution sol;
        if (!engine_exists(ps, Regime::InPhase,
                           preds[0].exists ? preds[0].amplitude / 2.0 : 0.05,
                           &sol))
            return false;
        return sol.stable;
    };
    double lo = 0.2, hi = 0.4;
    if (!stable_at(lo) || stable_at(hi))
        return {false, "stability bracket does not straddle the flip"};
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (stable_at(mid) ? lo : hi) = mid;
    }
    const double st_stab =
        huygens::params::sigma_tilde(pp(0.01, 5.0, 0.5 * (lo + hi), 0.0, 0.5));
    const double stab_err = std::abs(st_stab - 0.055555555555555552);

    // existence boundary at a=1: flip of the in-phase solve outcome
    const auto exists_at = [](double sigma) {
        const auto q = pp(0.01, 1.0, sigma, 0.0, 0.5);
        const auto ps = huygens::poincare::prepare(Model::ThreeDofSigma, q);
        const auto preds =
            huygens::poincare::closed_form_regimes(q, Model::ThreeDofSigma);
        return engine_exists(ps, Regime::InPhase,
                             preds[0].exists
                                 ? std::max(preds[0].amplitude / 2.0, 0.02)
                                 : 0.05,
                             nullptr);
    };
    lo = 0.05;
    hi = 0.2;
    if (!exists_at(lo) || exists_at(hi))
        return {false, "existence bracket does not straddle the flip"};
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (exists_at(mid) ? lo : hi) = mid;
    }
    const double st_exist =
        huygens::params::sigma_tilde(pp(0.01, 1.0, 0.5 * (lo + hi), 0.0, 0.5));
    const double exist_err = std::abs(st_exist - 0.125);

    const bool ok = stab_err <= 1e-6 && exist_err <= 1e-6;
    return {ok, fmt("stability st*=%.12f (err %.2e), existence st*=%.12f "
                    "(err %.2e)",
                    st_stab, stab_err, st_exist, exist_err)};
}

// --- criterion 6: slot average matches the hand first harmonic ---------

Outcome criterion6() {
    std::mt19937 rng(99u);
    std::uniform_real_distribution<double> ua(0.5, 5.0), ug(0.05, 1.0),
        ux(-0.7, 0.7);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const double a = ua(rng), gamma = ug(rng);
        const C alpha(ux(rng), ux(rng));

        // engine side: the minimal self-excited oscillator
        huygens::poincare::QuasiLinearSystem sys;
        sys.A = Eigen::MatrixXd::Zero(2, 2);
        sys.A(0, 1) = 1.0;
        sys.A(1, 0) = -1.0;
        sys.mu = 0.01;
        huygens::poincare::Polynomial drive(2);
        drive.add(a * gamma * gamma, {0, 1}).add(-a, {2, 1});
        sys.phi = {huygens::poincare::Polynomial(2), drive};
        const auto ps =
            huygens::poincare::prepare(std::move(sys), {C(0, 1), C(0, -1)});
        Eigen::VectorXcd al(2);
        al << alpha, std::conj(alpha);
        const C engine = huygens::poincare::average_P(0, al, ps);
        const C hand = 0.5 * a * alpha * (gamma * gamma - std::norm(alpha));
        worst = std::max(worst, std::abs(engine - hand));

        // quadrature side: the same harmonic taken directly
        const auto f = [&](double t) {
            const C e(std::cos(t), std::sin(t));
            const double th = 2.0 * (alpha * e).real();
            const double dth = 2.0 * (C(0, 1) * alpha * e).real();
            return C(a * (gamma * gamma - th * th) * dth, 0.0);
        };
        const C avg = huygens::poincare::harmonic_average(f, 1);
        const C want = C(0, 1) * a * alpha * (gamma * gamma - std::norm(alpha));
        worst = std::max(worst, std::abs(avg - want));
    }
    return {worst < 1e-12, fmt("worst |error| = %.2e over 50 draws", worst)};
}

// --- criterion 7: stability roots match the factored cubics ------------

Outcome criterion7() {
    const double a = 5.0, gamma = 0.5, omega = 0.3;
    const double g2 = gamma * gamma;
    double worst_ok = 0;
    for (int i = 0; i < 20; ++i) {
        const double sigma = 0.02 + 0.38 * i / 19.0;
        const auto q = pp(0.01, a, sigma, omega, gamma);
        const double st = huygens::params::sigma_tilde(q);
        const auto ps = huygens::poincare::prepare(Model::ThreeDofSigma, q);

        const auto in = solve_regime(ps, Regime::InPhase,
                                     std::sqrt((g2 - 2 * st) / (1 + 2 * st)));
        const double lin_in = -a * (g2 - 2 * st);
        const double b_in = a * (g2 - 2 * st * (2 + g2)) / (1 + 2 * st);
        const double c_in = a * st * (1 + g2) /
                            (sigma * (1 + 2 * st) * (1 + 2 * st)) *
                            (1 + 2 * a * sigma * st + g2 * (1 - a * sigma));
        if (!roots_match(in.leading_roots,
                         cubic_roots(lin_in, b_in, c_in), 1e-8))
            return {false, fmt("in-phase roots diverge at sigma=%.4f", sigma)};

        const auto anti = solve_regime(ps, Regime::AntiPhase, gamma);
        const double lin_an = -a * g2;
        const double b_an = a * ((1 + 4 * st) * g2 + 2 * st);
        const double c_an = a * st / sigma * (1 + g2) *
                            (1 + g2 * (a * sigma + 3));
        if (!roots_match(anti.leading_roots,
                         cubic_roots(lin_an, b_an, c_an), 1e-8))
            return {false, fmt("anti-phase roots diverge at sigma=%.4f",
                               sigma)};
        worst_ok = sigma;
    }
    return {true, fmt("20 points over sigma in [0.02, %.2f], both regimes",
                      worst_ok)};
}

// --- criterion 8: linear system energy and asymptote -------------------

Outcome criterion8() {
    const auto d = huygens::params::to_dimensionless(clock_frame());
    huygens::dynamics::State x0 = huygens::dynamics::State::Zero(6);
    x0[0] = 0.3;
    x0[2] = 0.1;
    const auto traj =
        huygens::dynamics::integrate(Model::Linear, x0, d, 800 * kTwoPi, 1e-9);
    const std::size_t m = traj.size();

    double tail_sum = 0;
    for (std::size_t k = m - m / 10; k < m; ++k)
        tail_sum = std::max(tail_sum, std::abs(traj.x[k][0] + traj.x[k][2]));

    const auto series = huygens::linear::lyapunov_series(traj, d);
    bool monotone = true;
    // slack covers dense-output noise at the 1e-9 integration tolerance
    const double slack = std::max(1e-12, 1e-8 * series.front().E);
    for (std::size_t k = 1; k < series.size(); ++k)
        if (series[k].E > series[k - 1].E + slack) {
            monotone = false;
            break;
        }

    // finite-difference dE/dt against the dissipation formula, early window
    double fd_worst = 0, edot_scale = 0;
    std::size_t k_end = 0;
    while (k_end < m && traj.t[k_end] < 50.0) ++k_end;
    for (std::size_t k = 1; k + 1 < k_end; ++k)
        edot_scale = std::max(edot_scale, std::abs(series[k].Edot));
    for (std::size_t k = 1; k + 1 < k_end; ++k) {
        const double fd = (series[k + 1].E - series[k - 1].E) /
                          (traj.t[k + 1] - traj.t[k - 1]);
        fd_worst = std::max(fd_worst, std::abs(fd - series[k].Edot));
    }
    const bool fd_ok = fd_worst <= 0.01 * edot_scale + 1e-12;

    const double target =
        huygens::linear::antiphase_asymptote(0.3, 0.0, 0.1, 0.0).amplitude /
        2.0;
    const auto env1 = huygens::classify::envelope(traj, 0);
    const auto env2 = huygens::classify::envelope(traj, 1);
    double a1 = 0, a2 = 0;
    for (std::size_t k = m - m / 10; k < m; ++k) {
        a1 += env1[k];
        a2 += env2[k];
    }
    a1 /= static_cast<double>(m / 10);
    a2 /= static_cast<double>(m / 10);
    const bool amp_ok = std::abs(a1 - target) <= 0.01 * target &&
                        std::abs(a2 - target) <= 0.01 * target;

    const bool ok = tail_sum < 1e-4 && monotone && fd_ok && amp_ok;
    return {ok, fmt("tail max|th1+th2|=%.2e monotone=%d fd_worst=%.2e "
                    "(scale %.2e) amp=%.5f/%.5f target=%.5f",
                    tail_sum, monotone ? 1 : 0, fd_worst, edot_scale, a1, a2,
                    target)};
}

// --- criterion 9: bundled figure experiments classify as documented ----

Outcome criterion9() {
    using huygens::classify::Regime;
    struct Row {
        huygens::classify::SyncRegimeReport rep;
        double wall = 0;
    };
    std::vector<std::string> problems;
    auto run_fig = [&](const char* id) {
        const auto& fp = huygens::figures::preset(id);
        const auto start = std::chrono::steady_clock::now();
        const auto traj = simulate(Model::Dimensionless, fp.dimensionless,
                                   fp.theta1, fp.theta2, fp.cycles);
        Row row;
        row.rep = huygens::classify::detect_regime(traj);
        row.wall = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
        if (row.wall >= 60.0)
            problems.push_back(fmt("%s took %.1fs", id, row.wall));
        return row;
    };

    const Row f3 = run_fig("fig3");
    const Row f4 = run_fig("fig4");
    const Row f5 = run_fig("fig5");
    const Row f6 = run_fig("fig6");
    const Row f7 = run_fig("fig7");

    if (f3.rep.regime != Regime::InPhase) problems.push_back("fig3 not in-phase");
    if (f4.rep.regime != Regime::AntiPhase || !f4.rep.beats)
        problems.push_back("fig4 not anti-phase with beats");
    if (f5.rep.regime != Regime::AntiPhase || f5.rep.beats)
        problems.push_back("fig5 not clean anti-phase");
    if (!f5.rep.settle_time || !f4.rep.settle_time ||
        *f5.rep.settle_time >= *f4.rep.settle_time)
        problems.push_back("fig5 does not settle faster than fig4");
    if (f6.rep.regime != Regime::AntiPhase || !f6.rep.beats)
        problems.push_back("fig6 not anti-phase with beats");
    if (!f6.rep.settle_time || !f4.rep.settle_time ||
        *f6.rep.settle_time <= 1.2 * *f4.rep.settle_time)
        problems.push_back("fig6 does not settle much later than fig4");
    if (f7.rep.regime != Regime::InPhase) problems.push_back("fig7 not in-phase");

    std::string detail = fmt(
        "fig3=%s fig4=%s(beats=%d,settle=%.0f) fig5=%s(settle=%.0f) "
        "fig6=%s(beats=%d,settle=%.0f) fig7=%s",
        huygens::classify::to_string(f3.rep.regime),
        huygens::classify::to_string(f4.rep.regime), f4.rep.beats ? 1 : 0,
        f4.rep.settle_time.value_or(-1.0),
        huygens::classify::to_string(f5.rep.regime),
        f5.rep.settle_time.value_or(-1.0),
        huygens::classify::to_string(f6.rep.regime), f6.rep.beats ? 1 : 0,
        f6.rep.settle_time.value_or(-1.0),
        huygens::classify::to_string(f7.rep.regime));
    for (const auto& p : problems) detail += "; " + p;
    return {problems.empty(), detail};
}

// --- criterion 10: stiff two-mass limit collapses onto the rigid case --

Outcome criterion10() {
    const auto q4 = pp(0.01, 4.0, 0.3, 0.0, 0.5, 1e4);
    const auto q3 = pp(0.005, 8.0, 0.3, 0.0, 0.5);
    const auto p4 = huygens::poincare::closed_form_regimes(q4, Model::TwoMass);
    const auto p3 =
        huygens::poincare::closed_form_regimes(q3, Model::ThreeDofSigma);
    double worst = 0;
    for (std::size_t i = 0; i < 2; ++i) {
        if (p4[i].exists != p3[i].exists)
            return {false, fmt("existence differs in regime %zu", i)};
        if (!p4[i].exists) continue;
        worst = std::max(worst, std::abs(p4[i].amplitude - p3[i].amplitude) /
                                    std::max(1.0, p3[i].amplitude));
        worst = std::max(worst,
                         std::abs(p4[i].period - p3[i].period) / kTwoPi);
    }

    // softer frames favour anti-phase: its existence threshold sits below
    // the in-phase one whenever the upper mass outweighs the exchange
    bool ordered = true;
    const double g2 = 0.25;
    for (double kappa : {1.1, 1.5, 2.0, 3.0, 5.0, 10.0}) {
        const auto q = pp(0.01, 5.0, 0.2, 0.0, 0.5, kappa);
        const auto p = huygens::poincare::closed_form_regimes(q, Model::TwoMass);
        const auto threshold = [&](const huygens::poincare::RegimePrediction&
                                       pred) {
            const double half = pred.amplitude / 2.0;
            return (g2 - half * half) / (1.0 + half * half);
        };
        const double s_in =
            threshold(p[0].regime == Regime::InPhase ? p[0] : p[1]);
        const double s_an =
            threshold(p[0].regime == Regime::AntiPhase ? p[0] : p[1]);
        if (!(s_an < s_in)) ordered = false;
    }

    const bool ok = worst <= 1e-3 && ordered;
    return {ok, fmt("stiff-limit worst gap %.2e; threshold ordering %s",
                    worst, ordered ? "holds" : "violated")};
}

// --- criterion 11: fixed-step self-convergence order --------------------

Outcome criterion11() {
    const auto d = huygens::params::to_dimensionless(clock_frame());
    huygens::dynamics::State x0 = huygens::dynamics::State::Zero(6);
    x0[0] = 0.1;
    x0[2] = -0.3;
    const auto final_state = [&](double h) {
        huygens::dynamics::IntegrateOptions o;
        o.fixed_step = h;
        o.sample_interval = 1e9;
        const auto tr = huygens::dynamics::integrate(Model::Dimensionless, x0,
                                                     d, 20.0, 1e-9, o);
        return tr.x.back();
    };
    const auto a = final_state(0.1);
    const auto b = final_state(0.05);
    const auto c = final_state(0.025);
    const double e1 = (a - b).norm();
    const double e2 = (b - c).norm();
    const double order = std::log2(e1 / e2);
    const bool ok = std::abs(order - 5.0) <= 0.2;
    return {ok, fmt("e(h)=%.3e e(h/2)=%.3e observed order %.3f", e1, e2,
                    order)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* label;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"heavy-frame anti-phase amplitude", criterion1},
        {"in-phase amplitude at the reference point", criterion2},
        {"period deficit slope and anti-phase period", criterion3},
        {"random-point engine vs closed forms", criterion4},
        {"bisection onto the analytic thresholds", criterion5},
        {"slot averages match the hand harmonic", criterion6},
        {"stability roots match the factored cubics", criterion7},
        {"linear energy decay and asymptote", criterion8},
        {"bundled figure regimes", criterion9},
        {"stiff two-mass limit", criterion10},
        {"integrator self-convergence order", criterion11},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.ok) ++failures;
        std::printf("%s  criterion %2zu  %s: %s\n", out.ok ? "PASS" : "FAIL",
                    i + 1, criteria[i].label, out.detail.c_str());
    }
    if (failures)
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    else
        std::printf("all %zu criteria passed\n", criteria.size());
    return failures == 0 ? 0 : 1;
}
