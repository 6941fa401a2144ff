#include "huygens/params.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace huygens::params {

void PhysicalParams::validate() const {
    if (!(m > 0) || !(M > 0) || !(l > 0) || !(g > 0))
        throw InvalidParameterError("m, M, l, g must be strictly positive");
    if (c < 0 || k < 0 || e < 0)
        throw InvalidParameterError("c, k, e must be non-negative");
    if (n < 1) throw InvalidParameterError("pendulum count must be >= 1");
}

void DimensionlessParams::validate() const {
    if (n < 1) throw InvalidParameterError("pendulum count must be >= 1");
    if (!(beta >= 0) || !(beta < 1.0 / n))
        throw InvalidParameterError("beta must satisfy 0 <= beta < 1/n");
    if (sigma < 0 || omega2 < 0 || epsilon < 0)
        throw InvalidParameterError("sigma, omega2, epsilon must be non-negative");
}

void PoincareParams::validate() const {
    if (n < 1) throw InvalidParameterError("pendulum count must be >= 1");
    if (!(mu >= 0) || !std::isfinite(mu))
        throw InvalidParameterError("mu must be non-negative");
    if (a < 0) throw InvalidParameterError("a must be non-negative");
    if (sigma < 0) throw InvalidParameterError("sigma must be non-negative");
    if (omega < 0) throw InvalidParameterError("omega must be non-negative");
    if (kappa && !(*kappa > 0))
        throw InvalidParameterError("kappa must be positive when present");
}

DimensionlessParams to_dimensionless(const PhysicalParams& p) {
    p.validate();
    const double Mn = p.M + p.n * p.m;
    const double wl = std::sqrt(p.g / p.l);
    DimensionlessParams d;
    d.sigma = p.c / (Mn * wl);
    d.omega2 = p.k * p.l / (Mn * p.g);
    d.beta = p.m / Mn;
    d.gamma = p.gamma;
    d.epsilon = p.e / (p.m * p.g * p.l);
    d.n = p.n;
    return d;
}

PhysicalParams from_dimensionless(const DimensionlessParams& d, double M,
                                  double g, double l) {
    d.validate();
    if (!(M > 0) || !(g > 0) || !(l > 0))
        throw InvalidParameterError("M, g, l must be strictly positive");
    PhysicalParams p;
    p.M = M;
    p.g = g;
    p.l = l;
    p.n = d.n;
    p.gamma = d.gamma;
    // beta = m/(M+nm)  =>  m = beta M/(1-n beta), M+nm = M/(1-n beta)
    p.m = d.beta * M / (1.0 - d.n * d.beta);
    const double Mn = M / (1.0 - d.n * d.beta);
    p.c = d.sigma * Mn * std::sqrt(g / l);
    p.k = d.omega2 * Mn * g / l;
    p.e = d.epsilon * p.m * g * l;
    if (p.m == 0)
        throw InvalidParameterError("beta = 0 has no physical preimage with finite m");
    return p;
}

PoincareParams to_poincare(const DimensionlessParams& d) {
    d.validate();
    PoincareParams q;
    q.mu = d.beta / (1.0 - d.n * d.beta);
    if (q.mu == 0) {
        if (d.epsilon != 0)
            throw InvalidParameterError(
                "beta = 0 with epsilon > 0: a = epsilon/mu is undefined");
        q.a = 0;
    } else {
        q.a = d.epsilon / q.mu;
    }
    q.sigma = d.sigma;
    q.omega = std::sqrt(d.omega2);
    q.gamma = d.gamma;
    q.n = d.n;
    return q;
}

DimensionlessParams from_poincare(const PoincareParams& p) {
    p.validate();
    DimensionlessParams d;
    d.beta = p.mu / (1.0 + p.n * p.mu);  // inverse of mu = beta/(1-n beta)
    d.epsilon = p.mu * p.a;
    d.sigma = p.sigma;
    d.omega2 = p.omega * p.omega;
    d.gamma = p.gamma;
    d.n = p.n;
    return d;
}

double sigma_tilde(const PoincareParams& p) {
    if (!(p.a > 0))
        throw InvalidParameterError("sigma_tilde requires a > 0");
    const double om2 = p.omega * p.omega;
    const double q = 1.0 - om2;
    return p.sigma / (p.a * (q * q + p.sigma * p.sigma));
}

ThresholdReport regime_thresholds(const PoincareParams& p) {
    if (p.gamma == 0)
        throw InvalidParameterError("regime thresholds require gamma != 0 (no limit cycle)");
    if (!(p.a > 0) || !(p.sigma > 0))
        throw InvalidParameterError("regime thresholds require a > 0 and sigma > 0");
    ThresholdReport r;
    const double g2 = p.gamma * p.gamma;
    r.sigma_tilde = sigma_tilde(p);
    r.exist_threshold = g2 / 2.0;
    r.stable_threshold = g2 / (2.0 * (2.0 + g2));
    r.a_sigma = p.a * p.sigma;

    // Boundary values classify into the more restrictive regime: the
    // theorem's strict inequalities leave the boundary open, so a closed
    // lower bound is adopted here.
    if (r.sigma_tilde >= r.exist_threshold)
        r.regime_summary = RegimeSummary::AntiPhaseOnly;
    else if (r.sigma_tilde >= r.stable_threshold)
        r.regime_summary = RegimeSummary::InPhaseUnstable;
    else
        r.regime_summary = RegimeSummary::Coexist;

    if (r.regime_summary != RegimeSummary::Coexist) {
        r.branch = StabilityBranch::NotApplicable;
    } else if (r.a_sigma < 1.0) {
        r.branch = StabilityBranch::SmallDamping;
    } else if (r.a_sigma > 1.0 &&
               r.sigma_tilde > (r.a_sigma - 1.0) / r.a_sigma * g2 / 2.0) {
        r.branch = StabilityBranch::LargeDamping;
    } else {
        r.branch = StabilityBranch::UnclassifiedByTheorem;
    }
    return r;
}

const char* to_string(RegimeSummary r) {
    switch (r) {
        case RegimeSummary::Coexist: return "coexist";
        case RegimeSummary::InPhaseUnstable: return "in-phase-unstable";
        case RegimeSummary::AntiPhaseOnly: return "anti-phase-only";
    }
    return "?";
}

const char* to_string(StabilityBranch b) {
    switch (b) {
        case StabilityBranch::SmallDamping: return "small-damping";
        case StabilityBranch::LargeDamping: return "large-damping";
        case StabilityBranch::UnclassifiedByTheorem: return "unclassified-by-theorem";
        case StabilityBranch::NotApplicable: return "not-applicable";
    }
    return "?";
}

const PhysicalParams& ParsedConfig::physical() const {
    if (layer != ConfigLayer::Physical)
        throw ConfigError("config does not carry physical-layer parameters");
    return std::get<PhysicalParams>(value);
}

const DimensionlessParams& ParsedConfig::dimensionless() const {
    if (layer != ConfigLayer::Dimensionless)
        throw ConfigError("config does not carry dimensionless-layer parameters");
    return std::get<DimensionlessParams>(value);
}

const PoincareParams& ParsedConfig::poincare() const {
    if (layer != ConfigLayer::Poincare)
        throw ConfigError("config does not carry poincare-layer parameters");
    return std::get<PoincareParams>(value);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad number '" + text + "'");
    }
    if (pos != text.size())
        throw ConfigError("config key '" + key + "': trailing junk in '" + text + "'");
    return v;
}

}  // namespace

ParsedConfig parse_config(std::istream& in) {
    // sigma/omega2 are shared between the dimensionless and poincare layers;
    // gamma/n are shared by all three. Only the marker sets pick a layer.
    static const std::set<std::string> kPhysical = {"m", "M", "l", "g", "c", "k", "e"};
    static const std::set<std::string> kDimless = {"beta", "epsilon"};
    static const std::set<std::string> kPoincare = {"mu", "a", "kappa"};
    static const std::set<std::string> kShared = {"sigma", "omega2", "gamma", "n"};

    std::map<std::string, double> kv;
    std::string layer_value;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "layer") {
            layer_value = val;
            continue;
        }
        if (!kPhysical.count(key) && !kDimless.count(key) &&
            !kPoincare.count(key) && !kShared.count(key))
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        if (kv.count(key))
            throw ConfigError("config key '" + key + "' given twice");
        kv[key] = parse_number(key, val);
    }

    auto any_present = [&](const std::set<std::string>& keys) {
        return std::any_of(keys.begin(), keys.end(),
                           [&](const auto& k) { return kv.count(k) != 0; });
    };
    const bool has_phys = any_present(kPhysical);
    const bool has_dim = any_present(kDimless);
    const bool has_poin = any_present(kPoincare);

    ConfigLayer layer;
    if (!layer_value.empty()) {
        if (layer_value == "physical") layer = ConfigLayer::Physical;
        else if (layer_value == "dimensionless") layer = ConfigLayer::Dimensionless;
        else if (layer_value == "poincare") layer = ConfigLayer::Poincare;
        else throw ConfigError("unknown layer '" + layer_value + "'");
    } else {
        const int layers = int(has_phys) + int(has_dim) + int(has_poin);
        if (layers > 1)
            throw ConfigError("mixed physical/dimensionless/poincare keys; "
                              "add a layer = ... line to disambiguate");
        if (has_phys) layer = ConfigLayer::Physical;
        else if (has_poin) layer = ConfigLayer::Poincare;
        else if (has_dim || kv.count("sigma") || kv.count("omega2"))
            layer = ConfigLayer::Dimensionless;
        else throw ConfigError("config carries no parameter keys");
    }

    auto get = [&](const std::string& key, std::optional<double> dflt =
                                               std::nullopt) -> double {
        auto it = kv.find(key);
        if (it != kv.end()) return it->second;
        if (dflt) return *dflt;
        throw ConfigError("config is missing required key '" + key + "'");
    };
    auto forbid = [&](const std::set<std::string>& keys, const char* why) {
        for (const auto& k : keys)
            if (kv.count(k))
                throw ConfigError("config key '" + k + "' does not belong to the " +
                                  why + " layer");
    };

    ParsedConfig out;
    out.layer = layer;
    const int n = static_cast<int>(get("n", 2.0));
    switch (layer) {
        case ConfigLayer::Physical: {
            forbid(kDimless, "physical");
            forbid(kPoincare, "physical");
            forbid({"sigma", "omega2"}, "physical");
            PhysicalParams p;
            p.m = get("m");
            p.M = get("M");
            p.l = get("l");
            p.g = get("g", 9.81);
            p.c = get("c");
            p.k = get("k");
            p.e = get("e", 0.0);
            p.gamma = get("gamma");
            p.n = n;
            p.validate();
            out.value = p;
            break;
        }
        case ConfigLayer::Dimensionless: {
            forbid(kPhysical, "dimensionless");
            forbid(kPoincare, "dimensionless");
            DimensionlessParams d;
            d.sigma = get("sigma", 0.0);
            d.omega2 = get("omega2", 0.0);
            d.beta = get("beta", 0.0);
            d.epsilon = get("epsilon", 0.0);
            d.gamma = get("gamma", 0.0);
            d.n = n;
            d.validate();
            out.value = d;
            break;
        }
        case ConfigLayer::Poincare: {
            forbid(kPhysical, "poincare");
            forbid(kDimless, "poincare");
            PoincareParams q;
            q.mu = get("mu");
            q.a = get("a");
            q.sigma = get("sigma", 0.0);
            q.omega = std::sqrt(get("omega2", 0.0));
            q.gamma = get("gamma", 0.0);
            if (kv.count("kappa")) q.kappa = kv["kappa"];
            q.n = n;
            q.validate();
            out.value = q;
            break;
        }
    }
    return out;
}

ParsedConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace huygens::params
