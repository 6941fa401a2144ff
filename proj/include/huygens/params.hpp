#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "huygens/errors.hpp"

namespace huygens::params {

// SI parameters of n identical pendulum clocks on a sprung, damped frame.
struct PhysicalParams {
    double m = 0;       // pendulum bob mass [kg]
    double M = 0;       // frame mass [kg]
    double l = 0;       // pendulum length [m]
    double g = 9.81;    // gravity [m/s^2]
    double c = 0;       // frame damping [N s/m]
    double k = 0;       // frame stiffness [N/m]
    double e = 0;       // escapement strength [N m s]
    double gamma = 0;   // escapement critical angle [rad]
    int n = 2;          // pendulum count

    void validate() const;
};

// Dimensionless layer: time rescaled by sqrt(g/l), frame position by l.
struct DimensionlessParams {
    double sigma = 0;    // frame damping
    double omega2 = 0;   // frame stiffness Omega^2
    double beta = 0;     // mass ratio m/(M+nm), must stay below 1/n
    double gamma = 0;    // escapement critical angle
    double epsilon = 0;  // escapement strength e/(mgl)
    int n = 2;

    void validate() const;
};

// Small-parameter layer: mu = beta/(1-n beta) = m/M, epsilon = mu*a.
// omega is stored as Omega itself (not squared) so resonance checks on
// multiples of Omega are direct. kappa is the two-mass frame stiffness.
struct PoincareParams {
    double mu = 0;
    double a = 0;
    double sigma = 0;
    double omega = 0;
    double gamma = 0;
    std::optional<double> kappa;
    int n = 2;

    void validate() const;
};

enum class RegimeSummary { Coexist, InPhaseUnstable, AntiPhaseOnly };

// Which sufficient stability branch covers the point. The two branches do
// not cover all of sigma_tilde < stable_threshold; the remainder is
// reported as UnclassifiedByTheorem rather than asserted unstable.
enum class StabilityBranch {
    SmallDamping,            // a*sigma < 1 branch
    LargeDamping,            // a*sigma > 1 branch (with its lower bound)
    UnclassifiedByTheorem,   // below stable_threshold, neither branch holds
    NotApplicable,           // at or above stable_threshold
};

struct ThresholdReport {
    double sigma_tilde = 0;
    double exist_threshold = 0;   // gamma^2/2
    double stable_threshold = 0;  // gamma^2/(2(2+gamma^2))
    double a_sigma = 0;
    StabilityBranch branch = StabilityBranch::NotApplicable;
    RegimeSummary regime_summary = RegimeSummary::AntiPhaseOnly;
};

DimensionlessParams to_dimensionless(const PhysicalParams& p);

// Inverse of to_dimensionless up to the scale freedom; M, g, l are fixed by
// the caller and the remaining fields follow.
PhysicalParams from_dimensionless(const DimensionlessParams& d, double M,
                                  double g, double l);

PoincareParams to_poincare(const DimensionlessParams& d);
DimensionlessParams from_poincare(const PoincareParams& p);

double sigma_tilde(const PoincareParams& p);
ThresholdReport regime_thresholds(const PoincareParams& p);

const char* to_string(RegimeSummary r);
const char* to_string(StabilityBranch b);

// Flat key = value config. Keys: m M l g c k e gamma n (physical),
// sigma omega2 beta epsilon (dimensionless), mu a kappa (poincare layer,
// sharing sigma/omega2/gamma/n). Mixed-layer files are rejected unless a
// `layer` key picks one. '#' starts a comment.
enum class ConfigLayer { Physical, Dimensionless, Poincare };

struct ParsedConfig {
    ConfigLayer layer;
    std::variant<PhysicalParams, DimensionlessParams, PoincareParams> value;

    const PhysicalParams& physical() const;
    const DimensionlessParams& dimensionless() const;
    const PoincareParams& poincare() const;
};

ParsedConfig parse_config(std::istream& in);
ParsedConfig parse_config_string(const std::string& text);

}  // namespace huygens::params
