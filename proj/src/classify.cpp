#include "huygens/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace huygens::classify {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPhaseFloor = 1e-8;  // amplitude below which phase is noise
// A settled stretch must cover at least this much time so a single
// well-behaved final sample cannot count as synchronization.
constexpr double kMinSettledSpan = 2.0 * kTwoPi;
constexpr double kTailFraction = 0.1;  // span used for asymptotic means

double wrap_pi(double x) {
    double y = std::remainder(x, kTwoPi);
    if (y <= -kPi) y += kTwoPi;
    return y;
}

// Distance to the nearest synchronized target, 0 or pi.
double phase_distance(double x) {
    const double w = std::abs(wrap_pi(x));
    return std::min(w, kPi - w);
}

// Centered moving average over one nominal cycle. The quadrature envelope of
// a settled state still carries a few-percent within-cycle ripple (the limit
// cycle is not a perfect circle when the escapement is strong), so band and
// depth tests must run on the cycle mean, not the raw series.
std::vector<double> cycle_mean(const std::vector<double>& e, double dt) {
    const std::size_t m = e.size();
    std::size_t w = dt > 0.0
        ? static_cast<std::size_t>(std::lround(kPi / dt))
        : 0;
    w = std::min(w, (m - 1) / 2);
    if (w == 0) return e;
    std::vector<double> prefix(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + e[j];
    std::vector<double> s(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lo = j > w ? j - w : 0;
        const std::size_t hi = std::min(m - 1, j + w);
        s[j] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi + 1 - lo);
    }
    return s;
}

}  // namespace

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::InPhase: return "in-phase";
        case Regime::AntiPhase: return "anti-phase";
        case Regime::Beats: return "beats";
        case Regime::Quenched: return "quenched";
        case Regime::Unsettled: return "unsettled";
    }
    return "unsettled";
}

std::vector<double> envelope(const dynamics::Trajectory& traj, int i) {
    if (i < 0 || i >= traj.n)
        throw InvalidParameterError("pendulum index out of range");
    if (traj.dim() < 2 * i + 2)
        throw ShapeError("trajectory states are narrower than the layout");
    std::vector<double> env(traj.size());
    for (std::size_t j = 0; j < traj.size(); ++j)
        env[j] = std::hypot(traj.x[j][2 * i], traj.x[j][2 * i + 1]);
    return env;
}

PhaseSeries phase_difference(const dynamics::Trajectory& traj) {
    if (traj.n < 2)
        throw InvalidParameterError("phase difference needs two pendulums");
    if (traj.dim() < 4)
        throw ShapeError("trajectory states are narrower than the layout");
    const std::size_t m = traj.size();
    PhaseSeries ps;
    ps.t = traj.t;
    ps.value.assign(m, 0.0);
    ps.defined.assign(m, 0);

    bool have_prev = false;
    double prev_raw = 0.0, prev_unwrapped = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const auto& x = traj.x[j];
        if (std::hypot(x[0], x[1]) < kPhaseFloor ||
            std::hypot(x[2], x[3]) < kPhaseFloor)
            continue;
        const double raw =
            std::atan2(-x[1], x[0]) - std::atan2(-x[3], x[2]);
        double unwrapped;
        if (have_prev) {
            unwrapped = prev_unwrapped + wrap_pi(raw - prev_raw);
        } else {
            unwrapped = wrap_pi(raw);
            have_prev = true;
        }
        ps.value[j] = unwrapped;
        ps.defined[j] = 1;
        prev_raw = raw;
        prev_unwrapped = unwrapped;
    }
    return ps;
}

PeriodEstimate measure_period(const dynamics::Trajectory& traj,
                              double t_start, double t_end) {
    if (traj.dim() < 1)
        throw InsufficientDataError("empty trajectory has no crossings");
    std::vector<double> crossings;
    for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
        if (traj.t[j] < t_start || traj.t[j + 1] > t_end) continue;
        const double a = traj.x[j][0], b = traj.x[j + 1][0];
        if (a < 0.0 && b >= 0.0) {
            const double s = a / (a - b);
            crossings.push_back(traj.t[j] + s * (traj.t[j + 1] - traj.t[j]));
        }
    }
    if (crossings.size() < 10)
        throw InsufficientDataError(
            "fewer than 10 upward zero crossings in the window");

    PeriodEstimate est;
    est.crossings = static_cast<int>(crossings.size());
    const std::size_t k = crossings.size() - 1;
    double mean = 0.0;
    for (std::size_t j = 0; j < k; ++j)
        mean += crossings[j + 1] - crossings[j];
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double d = crossings[j + 1] - crossings[j] - mean;
        var += d * d;
    }
    var /= static_cast<double>(k - 1);
    est.period = mean;
    est.std_error = std::sqrt(var / static_cast<double>(k));
    return est;
}

SyncRegimeReport detect_regime(const dynamics::Trajectory& traj,
                               const Tolerances& tols) {
    SyncRegimeReport report;
    const std::size_t m = traj.size();
    if (m < 16 || traj.n < 2 || traj.dim() < 4) return report;

    const PhaseSeries phases = phase_difference(traj);
    const std::vector<double>& t = traj.t;
    const double span = t.back() - t.front();
    const double dt = span / static_cast<double>(m - 1);
    const std::vector<double> env1 = cycle_mean(envelope(traj, 0), dt);
    const std::vector<double> env2 = cycle_mean(envelope(traj, 1), dt);

    // Tail means are the asymptotic amplitudes.
    const double t_tail = t.back() - kTailFraction * span;
    double a1 = 0.0, a2 = 0.0;
    std::size_t tail_count = 0;
    for (std::size_t j = 0; j < m; ++j) {
        if (t[j] < t_tail) continue;
        a1 += env1[j];
        a2 += env2[j];
        ++tail_count;
    }
    if (tail_count == 0) return report;
    a1 /= static_cast<double>(tail_count);
    a2 /= static_cast<double>(tail_count);
    report.asymptotic_amplitude = {a1, a2};

    for (std::size_t j = m; j-- > 0;) {
        if (phases.defined[j]) {
            report.phase_difference_final = wrap_pi(phases.value[j]);
            break;
        }
    }

    // A sample is settled when the phase difference sits at a target and
    // both envelopes sit at their tail means.
    auto settled_at = [&](std::size_t j) {
        return phases.defined[j] &&
               phase_distance(phases.value[j]) <= tols.phase_tol &&
               std::abs(env1[j] - a1) <= tols.amp_tol * a1 &&
               std::abs(env2[j] - a2) <= tols.amp_tol * a2;
    };
    std::size_t settle_idx = m;  // first index of the all-settled suffix
    for (std::size_t j = m; j-- > 0;) {
        if (!settled_at(j)) break;
        settle_idx = j;
    }
    const bool settled =
        settle_idx < m && t.back() - t[settle_idx] >= kMinSettledSpan;

    // Beat depth: the deepest fractional drop of an envelope below its own
    // running maximum. An energy exchange pulls one pendulum well under a
    // level it has already reached; a plain monotone approach to the limit
    // amplitude never drops far below its running peak.
    double depth_all = 0.0, depth_before = 0.0;
    for (const std::vector<double>* env : {&env1, &env2}) {
        double peak = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            peak = std::max(peak, (*env)[j]);
            if (peak <= 0.0) continue;
            const double depth = 1.0 - (*env)[j] / peak;
            depth_all = std::max(depth_all, depth);
            if (!settled || j < settle_idx)
                depth_before = std::max(depth_before, depth);
        }
    }
    report.beat_depth = depth_all;

    if (settled) {
        report.settle_time = t[settle_idx];
        const double w = wrap_pi(report.phase_difference_final);
        report.regime = std::abs(w) <= std::abs(kPi - std::abs(w))
                            ? Regime::InPhase
                            : Regime::AntiPhase;
        report.beats = depth_before > tols.beat_depth;
    } else if (std::min(a1, a2) < tols.quench_tol) {
        report.regime = Regime::Quenched;
    } else {
        report.regime = Regime::Unsettled;
    }

    const double window_start =
        settled ? t[settle_idx] : t.front() + 0.5 * span;
    try {
        const PeriodEstimate est = measure_period(traj, window_start);
        report.measured_period = est.period;
        report.period_std_error = est.std_error;
    } catch (const InsufficientDataError&) {
        // leave the period unmeasured
    }
    return report;
}

}  // namespace huygens::classify
