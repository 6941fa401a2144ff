#include <CLI11.hpp>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "huygens/classify.hpp"
#include "huygens/dynamics.hpp"
#include "huygens/errors.hpp"
#include "huygens/figures.hpp"
#include "huygens/jsonio.hpp"
#include "huygens/params.hpp"
#include "huygens/poincare.hpp"
#include "huygens/svg.hpp"

namespace {

using huygens::ConfigError;
using huygens::dynamics::Model;
using huygens::jsonio::Json;
namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Model model_from_string(const std::string& name) {
    if (name == "full") return Model::FullNonlinear;
    if (name == "dimensionless") return Model::Dimensionless;
    if (name == "linear") return Model::Linear;
    if (name == "small-sigma") return Model::SmallSigma;
    if (name == "three-dof") return Model::ThreeDofSigma;
    if (name == "two-mass") return Model::TwoMass;
    throw ConfigError("unknown model '" + name +
                      "'; expected full, dimensionless, linear, small-sigma, "
                      "three-dof or two-mass");
}

const char* model_name(Model m) {
    switch (m) {
        case Model::FullNonlinear: return "full";
        case Model::Dimensionless: return "dimensionless";
        case Model::Linear: return "linear";
        case Model::SmallSigma: return "small-sigma";
        case Model::ThreeDofSigma: return "three-dof";
        case Model::TwoMass: return "two-mass";
    }
    return "?";
}

bool needs_poincare(Model m) {
    return m == Model::SmallSigma || m == Model::ThreeDofSigma ||
           m == Model::TwoMass;
}

// Parameter flags shared by the subcommands. Presence is tracked through
// the CLI option pointers, so unset flags never shadow config values.
struct ParamFlags {
    std::string config;
    double mu = 0, a = 0, sigma = 0, omega = 0, omega2 = 0, beta = 0,
           epsilon = 0, gamma = 0, kappa = 0;
    int n = 2;
    CLI::Option *mu_o = nullptr, *a_o = nullptr, *sigma_o = nullptr,
                *omega_o = nullptr, *omega2_o = nullptr, *beta_o = nullptr,
                *epsilon_o = nullptr, *gamma_o = nullptr, *kappa_o = nullptr,
                *n_o = nullptr;

    bool any_flag() const {
        for (const CLI::Option* o :
             {mu_o, a_o, sigma_o, omega_o, omega2_o, beta_o, epsilon_o,
              gamma_o, kappa_o, n_o})
            if (o && o->count()) return true;
        return false;
    }
};

void add_param_flags(CLI::App* cmd, ParamFlags& f) {
    cmd->add_option("--config", f.config,
                    "parameter file (key = value lines, any layer)");
    f.mu_o = cmd->add_option("--mu", f.mu, "small parameter");
    f.a_o = cmd->add_option("--a", f.a, "escapement strength a");
    f.sigma_o = cmd->add_option("--sigma", f.sigma, "frame damping sigma");
    f.omega_o =
        cmd->add_option("--omega", f.omega, "frame frequency Omega "
                                            "(small-parameter models)");
    f.omega2_o = cmd->add_option("--omega2", f.omega2,
                                 "frame frequency squared (dimensionless "
                                 "models)");
    f.beta_o = cmd->add_option("--beta", f.beta, "mass ratio beta");
    f.epsilon_o =
        cmd->add_option("--epsilon", f.epsilon, "escapement strength epsilon");
    f.gamma_o = cmd->add_option("--gamma", f.gamma, "escapement half-width");
    f.kappa_o = cmd->add_option("--kappa", f.kappa,
                                "frame stiffness ratio (two-mass model)");
    f.n_o = cmd->add_option("--n", f.n, "pendulum count (default 2)");
}

huygens::params::DimensionlessParams to_dimensionless_layer(
    const huygens::params::ParsedConfig& cfg) {
    using huygens::params::ConfigLayer;
    switch (cfg.layer) {
        case ConfigLayer::Physical:
            return huygens::params::to_dimensionless(cfg.physical());
        case ConfigLayer::Dimensionless: return cfg.dimensionless();
        case ConfigLayer::Poincare:
            return huygens::params::from_poincare(cfg.poincare());
    }
    throw ConfigError("unreachable config layer");
}

huygens::params::PoincareParams to_poincare_layer(
    const huygens::params::ParsedConfig& cfg) {
    using huygens::params::ConfigLayer;
    if (cfg.layer == ConfigLayer::Poincare) return cfg.poincare();
    return huygens::params::to_poincare(to_dimensionless_layer(cfg));
}

huygens::dynamics::ModelParams resolve_params(Model model,
                                              const ParamFlags& f) {
    const bool flags = f.any_flag();
    if (!f.config.empty() && flags)
        throw ConfigError(
            "give parameters either via --config or via flags, not both");
    if (f.config.empty() && !flags)
        throw ConfigError(
            "no parameters given; use --config FILE or parameter flags");

    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot open config '" + f.config + "'");
        const auto cfg = huygens::params::parse_config(in);
        if (needs_poincare(model)) return to_poincare_layer(cfg);
        return to_dimensionless_layer(cfg);
    }

    if (needs_poincare(model)) {
        if (f.omega2_o->count() || f.beta_o->count() || f.epsilon_o->count())
            throw ConfigError(
                "--omega2/--beta/--epsilon belong to the dimensionless "
                "layer; this model takes --mu --a --sigma --omega --gamma "
                "[--kappa]");
        if (!f.mu_o->count()) throw ConfigError("--mu is required");
        if (!f.a_o->count()) throw ConfigError("--a is required");
        huygens::params::PoincareParams q;
        q.mu = f.mu;
        q.a = f.a;
        q.sigma = f.sigma_o->count() ? f.sigma : 0.0;
        q.omega = f.omega_o->count() ? f.omega : 0.0;
        q.gamma = f.gamma_o->count() ? f.gamma : 0.0;
        if (f.kappa_o->count()) q.kappa = f.kappa;
        q.n = f.n_o->count() ? f.n : 2;
        q.validate();
        return q;
    }

    if (f.mu_o->count() || f.a_o->count() || f.omega_o->count() ||
        f.kappa_o->count())
        throw ConfigError(
            "--mu/--a/--omega/--kappa belong to the small-parameter layer; "
            "this model takes --sigma --omega2 --beta --epsilon --gamma");
    huygens::params::DimensionlessParams d;
    d.sigma = f.sigma_o->count() ? f.sigma : 0.0;
    d.omega2 = f.omega2_o->count() ? f.omega2 : 0.0;
    d.beta = f.beta_o->count() ? f.beta : 0.0;
    d.epsilon = f.epsilon_o->count() ? f.epsilon : 0.0;
    d.gamma = f.gamma_o->count() ? f.gamma : 0.0;
    d.n = f.n_o->count() ? f.n : 2;
    d.validate();
    return d;
}

Json params_json(const huygens::dynamics::ModelParams& mp) {
    Json j;
    if (std::holds_alternative<huygens::params::DimensionlessParams>(mp))
        j["dimensionless"] = huygens::jsonio::to_json(
            std::get<huygens::params::DimensionlessParams>(mp));
    else
        j["poincare"] = huygens::jsonio::to_json(
            std::get<huygens::params::PoincareParams>(mp));
    return j;
}

struct IcFlags {
    double theta1 = 0, dtheta1 = 0, theta2 = 0, dtheta2 = 0, y = 0, dy = 0,
           y2 = 0, dy2 = 0;
    CLI::Option *y2_o = nullptr, *dy2_o = nullptr;
};

void add_ic_flags(CLI::App* cmd, IcFlags& f) {
    cmd->add_option("--theta1-0", f.theta1, "initial theta_1 [rad]");
    cmd->add_option("--dtheta1-0", f.dtheta1, "initial dtheta_1/dt");
    cmd->add_option("--theta2-0", f.theta2, "initial theta_2 [rad]");
    cmd->add_option("--dtheta2-0", f.dtheta2, "initial dtheta_2/dt");
    cmd->add_option("--y-0", f.y, "initial frame position");
    cmd->add_option("--dy-0", f.dy, "initial frame velocity");
    f.y2_o = cmd->add_option("--y2-0", f.y2,
                             "initial second frame position (two-mass)");
    f.dy2_o = cmd->add_option("--dy2-0", f.dy2,
                              "initial second frame velocity (two-mass)");
}

huygens::dynamics::State build_x0(Model model,
                                  const huygens::dynamics::ModelParams& mp,
                                  const IcFlags& ic) {
    const int dim = huygens::dynamics::state_dim(model, mp);
    huygens::dynamics::State x0 = huygens::dynamics::State::Zero(dim);
    const int n = std::visit([](const auto& p) { return p.n; }, mp);
    x0[0] = ic.theta1;
    x0[1] = ic.dtheta1;
    if (n >= 2) {
        x0[2] = ic.theta2;
        x0[3] = ic.dtheta2;
    }
    if (model == Model::TwoMass) {
        x0[4] = ic.y;
        x0[5] = ic.dy;
        x0[6] = ic.y2;
        x0[7] = ic.dy2;
    } else {
        if (ic.y2_o->count() || ic.dy2_o->count())
            throw ConfigError("--y2-0/--dy2-0 apply to the two-mass model");
        x0[2 * n] = ic.y;
        x0[2 * n + 1] = ic.dy;
    }
    return x0;
}

std::optional<std::string> maybe_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("HUYGENS_OUT"); env && *env)
        return std::string(env);
    return std::nullopt;
}

std::string ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + dir +
                          "': " + ec.message());
    return dir;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- simulate ---------------------------------------------------------

struct SimulateOpts {
    std::string model;
    ParamFlags params;
    IcFlags ic;
    double t_end = 0;
    double tol = 1e-9;
    double sample_interval = kTwoPi / 200.0;
    bool project = false;
    std::string out;
};

huygens::dynamics::Trajectory run_integration(Model model,
                                              const SimulateOpts& o,
                                              huygens::dynamics::ModelParams& mp,
                                              huygens::dynamics::State& x0) {
    mp = resolve_params(model, o.params);
    x0 = build_x0(model, mp, o.ic);
    if (o.project) {
        if (model != Model::TwoMass)
            throw ConfigError(
                "--project-rigid-body applies to the two-mass model");
        huygens::dynamics::project_rigid_body(
            x0, std::get<huygens::params::PoincareParams>(mp));
    }
    huygens::dynamics::IntegrateOptions opts;
    opts.sample_interval = o.sample_interval;
    return huygens::dynamics::integrate(model, x0, mp, o.t_end, o.tol, opts);
}

void run_simulate(const SimulateOpts& o) {
    const Model model = model_from_string(o.model);
    huygens::dynamics::ModelParams mp;
    huygens::dynamics::State x0;
    const auto traj = run_integration(model, o, mp, x0);

    const std::string dir = ensure_dir(maybe_out_dir(o.out).value_or("."));
    huygens::jsonio::write_csv_atomic(dir + "/trajectory.csv", traj);

    Json meta;
    meta["command"] = "simulate";
    meta["model"] = model_name(model);
    meta["params"] = params_json(mp);
    meta["initial_state"] = std::vector<double>(x0.data(), x0.data() + x0.size());
    meta["t_end"] = o.t_end;
    meta["tol"] = o.tol;
    meta["sample_interval"] = o.sample_interval;
    meta["samples"] = traj.size();
    huygens::jsonio::write_text_atomic(dir + "/metadata.json",
                                       huygens::jsonio::dump(meta));
    std::printf("wrote %s/trajectory.csv (%zu samples, dim %d)\n",
                dir.c_str(), traj.size(), traj.dim());
}

// --- predict ----------------------------------------------------------

struct PredictOpts {
    std::string model;
    ParamFlags params;
    std::string out;
};

struct EngineEntry {
    huygens::poincare::Regime regime;
    bool exists = false;
    std::optional<huygens::poincare::PoincareSolution> sol;
    std::string note;
};

EngineEntry engine_solve(const huygens::poincare::PreparedSystem& ps,
                         huygens::poincare::Regime regime, double gamma) {
    using huygens::poincare::Regime;
    EngineEntry e;
    e.regime = regime;
    huygens::poincare::SolveSeed seed;
    seed.r0 = gamma > 0 ? gamma : 0.1;
    seed.phi0 = regime == Regime::InPhase ? 0.0 : std::numbers::pi;
    try {
        auto sol = huygens::poincare::solve_amplitudes(ps, seed);
        if (sol.regime != regime) {
            e.note = std::string("converged to the ") +
                     huygens::poincare::to_string(sol.regime) + " solution";
        } else {
            e.exists = true;
            e.sol = std::move(sol);
        }
    } catch (const huygens::NoSolutionError& err) {
        e.note = err.what();
    } catch (const huygens::TrivialSolutionError& err) {
        e.note = err.what();
    } catch (const huygens::DegenerateSolutionError& err) {
        e.note = err.what();
    }
    return e;
}

bool close_rel(double x, double y, double tol) {
    return std::abs(x - y) <= tol * std::max(1.0, std::abs(y));
}

void run_predict(const PredictOpts& o) {
    const Model model = model_from_string(o.model);
    if (!needs_poincare(model))
        throw ConfigError(
            "predict works on the small-parameter models: small-sigma, "
            "three-dof, two-mass");
    const auto mp = resolve_params(model, o.params);
    const auto& q = std::get<huygens::params::PoincareParams>(mp);

    const auto predictions = huygens::poincare::closed_form_regimes(q, model);

    Json j;
    j["command"] = "predict";
    j["model"] = model_name(model);
    j["params"] = params_json(mp);
    try {
        j["thresholds"] =
            huygens::jsonio::to_json(huygens::params::regime_thresholds(q));
    } catch (const huygens::Error&) {
        j["thresholds"] = nullptr;
    }

    Json closed = Json::array();
    for (const auto& p : predictions)
        closed.push_back(huygens::jsonio::to_json(p));
    j["closed_form"] = closed;

    std::vector<EngineEntry> engine;
    std::string engine_error;
    try {
        const auto ps = huygens::poincare::prepare(model, q);
        for (const auto& p : predictions)
            engine.push_back(engine_solve(ps, p.regime, q.gamma));
    } catch (const huygens::Error& err) {
        engine_error = err.what();
    }

    bool agreement = engine_error.empty();
    Json eng = Json::array();
    for (std::size_t i = 0; i < engine.size(); ++i) {
        const auto& e = engine[i];
        Json je;
        je["regime"] = huygens::poincare::to_string(e.regime);
        je["exists"] = e.exists;
        if (e.sol) {
            je["amplitude"] = 2.0 * e.sol->r;
            je["delta1"] = e.sol->delta1;
            je["period"] = e.sol->period;
            je["stable"] = e.sol->stable;
            je["iterations"] = e.sol->iterations;
        }
        if (!e.note.empty()) je["note"] = e.note;
        eng.push_back(je);

        const auto& cf = predictions[i];
        if (cf.exists != e.exists) {
            agreement = false;
        } else if (e.exists) {
            if (!close_rel(2.0 * e.sol->r, cf.amplitude, 1e-8) ||
                !close_rel(e.sol->delta1, cf.delta1, 1e-8))
                agreement = false;
            if (cf.stable && *cf.stable != e.sol->stable) agreement = false;
        }
    }
    j["engine"] = eng;
    if (!engine_error.empty()) j["engine_error"] = engine_error;
    j["agreement"] = agreement;

    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        std::printf("%-10s (%s): %s", huygens::poincare::to_string(p.regime),
                    huygens::poincare::to_string(p.source),
                    p.exists ? "exists" : "does not exist");
        if (p.exists) {
            std::printf("  amplitude=%.10f  period=%.10f  delta1=%.10f",
                        p.amplitude, p.period, p.delta1);
            if (p.stable)
                std::printf("  stable=%s", *p.stable ? "yes" : "no");
        }
        std::printf("\n");
        if (i < engine.size()) {
            const auto& e = engine[i];
            std::printf("  engine:         %s",
                        e.exists ? "exists" : "does not exist");
            if (e.sol)
                std::printf(
                    "  amplitude=%.10f  period=%.10f  delta1=%.10f  "
                    "stable=%s  iterations=%d",
                    2.0 * e.sol->r, e.sol->period, e.sol->delta1,
                    e.sol->stable ? "yes" : "no", e.sol->iterations);
            if (!e.note.empty()) std::printf("  (%s)", e.note.c_str());
            std::printf("\n");
        }
    }
    if (!engine_error.empty())
        std::printf("engine error: %s\n", engine_error.c_str());
    std::printf("agreement: %s\n", agreement ? "yes" : "no");

    if (const auto dir = maybe_out_dir(o.out)) {
        ensure_dir(*dir);
        huygens::jsonio::write_text_atomic(*dir + "/prediction.json",
                                           huygens::jsonio::dump(j));
        std::printf("wrote %s/prediction.json\n", dir->c_str());
    }
}

// --- analyze ----------------------------------------------------------

struct AnalyzeOpts {
    std::string input;
    SimulateOpts sim;  // model/params/ICs/t_end for the inline path
    std::string out;
};

double parse_cell(const std::string& cell, const char* what, int lineno) {
    double v = 0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ConfigError(std::string("trajectory CSV line ") +
                          std::to_string(lineno) + ": bad " + what + " '" +
                          cell + "'");
    return v;
}

huygens::dynamics::Trajectory read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trajectory '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("trajectory '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> names;
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) names.push_back(cell);
    if (names.empty() || names[0] != "t")
        throw ConfigError("trajectory '" + path +
                          "': header must start with 't'");
    int n = 0;
    bool two_mass = false;
    for (const auto& name : names) {
        if (name.rfind("theta", 0) == 0) ++n;
        if (name == "y2") two_mass = true;
    }
    if (n < 1)
        throw ConfigError("trajectory '" + path +
                          "': no pendulum columns in header");
    const std::size_t cols = names.size();

    huygens::dynamics::Trajectory traj;
    traj.model = two_mass ? Model::TwoMass : Model::Dimensionless;
    traj.n = n;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::vector<double> vals;
        vals.reserve(cols);
        while (std::getline(row, cell, ','))
            vals.push_back(parse_cell(cell, "value", lineno));
        if (vals.size() != cols)
            throw ConfigError("trajectory CSV line " + std::to_string(lineno) +
                              ": expected " + std::to_string(cols) +
                              " columns, got " + std::to_string(vals.size()));
        traj.t.push_back(vals[0]);
        huygens::dynamics::State x(static_cast<Eigen::Index>(cols) - 1);
        for (std::size_t k = 1; k < cols; ++k)
            x[static_cast<Eigen::Index>(k - 1)] = vals[k];
        traj.x.push_back(std::move(x));
    }
    return traj;
}

void print_report(const huygens::classify::SyncRegimeReport& r) {
    std::printf("regime                %s\n",
                huygens::classify::to_string(r.regime));
    if (r.settle_time)
        std::printf("settle time           %.3f  (%.2f cycles)\n",
                    *r.settle_time, *r.settle_time / kTwoPi);
    else
        std::printf("settle time           -\n");
    std::printf("asymptotic amplitude  %.6f  %.6f\n",
                r.asymptotic_amplitude[0], r.asymptotic_amplitude[1]);
    if (r.measured_period > 0)
        std::printf("measured period       %.7f +/- %.7f\n", r.measured_period,
                    r.period_std_error);
    else
        std::printf("measured period       -\n");
    std::printf("final phase diff      %.6f\n", r.phase_difference_final);
    std::printf("beat depth            %.3f\n", r.beat_depth);
    std::printf("beats                 %s\n", r.beats ? "yes" : "no");
}

void run_analyze(const AnalyzeOpts& o) {
    const bool inline_sim = !o.sim.model.empty();
    if (!o.input.empty() && inline_sim)
        throw ConfigError("use --input or --model, not both");
    if (o.input.empty() && !inline_sim)
        throw ConfigError("analyze needs --input CSV or --model plus "
                          "parameters");

    huygens::dynamics::Trajectory traj;
    if (!o.input.empty()) {
        traj = read_csv(o.input);
    } else {
        const Model model = model_from_string(o.sim.model);
        huygens::dynamics::ModelParams mp;
        huygens::dynamics::State x0;
        traj = run_integration(model, o.sim, mp, x0);
    }

    const auto report = huygens::classify::detect_regime(traj);
    print_report(report);

    if (const auto dir = maybe_out_dir(o.out)) {
        ensure_dir(*dir);
        Json j;
        j["command"] = "analyze";
        if (!o.input.empty()) j["input"] = o.input;
        j["samples"] = traj.size();
        j["report"] = huygens::jsonio::to_json(report);
        huygens::jsonio::write_text_atomic(*dir + "/report.json",
                                           huygens::jsonio::dump(j));
        std::printf("wrote %s/report.json\n", dir->c_str());
    }
}

// --- sweep ------------------------------------------------------------

struct SweepOpts {
    std::string model;
    ParamFlags params;
    std::string grid;
    bool simulate = false;
    int workers = 1;
    double t_end = 300.0 * kTwoPi;
    double tol = 1e-9;
    std::string out;
};

struct GridSpec {
    std::string axis;
    double lo = 0, hi = 0;
    std::size_t count = 0;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 4)
        throw ConfigError("--grid expects axis:lo:hi:count, got '" + text +
                          "'");
    g.axis = parts[0];
    static const std::vector<std::string> kAxes = {"mu",    "a",     "sigma",
                                                   "omega", "gamma", "kappa"};
    if (std::find(kAxes.begin(), kAxes.end(), g.axis) == kAxes.end())
        throw ConfigError("--grid axis must be one of mu, a, sigma, omega, "
                          "gamma, kappa");
    g.lo = parse_cell(parts[1], "grid bound", 0);
    g.hi = parse_cell(parts[2], "grid bound", 0);
    const double count = parse_cell(parts[3], "grid count", 0);
    if (count < 0 || count != std::floor(count))
        throw ConfigError("--grid count must be a non-negative integer");
    g.count = static_cast<std::size_t>(count);
    return g;
}

void set_axis(huygens::params::PoincareParams& q, const std::string& axis,
              double v) {
    if (axis == "mu") q.mu = v;
    else if (axis == "a") q.a = v;
    else if (axis == "sigma") q.sigma = v;
    else if (axis == "omega") q.omega = v;
    else if (axis == "gamma") q.gamma = v;
    else q.kappa = v;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

const char kSweepHeader[] =
    "point,axis,value,mu,a,sigma,omega,gamma,kappa,sigma_tilde,"
    "in_exists,in_stable,in_amplitude,in_delta1,in_period,"
    "anti_exists,anti_stable,anti_amplitude,anti_delta1,anti_period,"
    "sim_regime,error";

std::string sweep_row(Model model, const huygens::params::PoincareParams& base,
                      const GridSpec& grid, std::size_t i, double value,
                      bool simulate, double t_end, double tol) {
    huygens::params::PoincareParams q = base;
    set_axis(q, grid.axis, value);

    std::string sigma_tilde, in[5], anti[5], sim, error;
    try {
        q.validate();
        sigma_tilde = g17(huygens::params::sigma_tilde(q));
        const auto preds = huygens::poincare::closed_form_regimes(q, model);
        for (const auto& p : preds) {
            std::string* dst =
                p.regime == huygens::poincare::Regime::InPhase ? in : anti;
            dst[0] = p.exists ? "1" : "0";
            dst[1] = p.stable ? (*p.stable ? "1" : "0") : "";
            dst[2] = g17(p.amplitude);
            dst[3] = g17(p.delta1);
            dst[4] = g17(p.period);
        }
        if (simulate) {
            const int dim = huygens::dynamics::state_dim(model, q);
            huygens::dynamics::State x0 =
                huygens::dynamics::State::Zero(dim);
            x0[0] = 1.1 * q.gamma;
            x0[2] = 0.9 * q.gamma;
            const auto traj =
                huygens::dynamics::integrate(model, x0, q, t_end, tol);
            sim = huygens::classify::to_string(
                huygens::classify::detect_regime(traj).regime);
        }
    } catch (const huygens::Error& e) {
        error = sanitize(e.what());
    }

    std::ostringstream row;
    row << i << ',' << grid.axis << ',' << g17(value) << ',' << g17(q.mu)
        << ',' << g17(q.a) << ',' << g17(q.sigma) << ',' << g17(q.omega)
        << ',' << g17(q.gamma) << ',' << (q.kappa ? g17(*q.kappa) : "")
        << ',' << sigma_tilde;
    for (const auto* block : {in, anti})
        for (int k = 0; k < 5; ++k) row << ',' << block[k];
    row << ',' << sim << ',' << error;
    return row.str();
}

void run_sweep(const SweepOpts& o) {
    const Model model = model_from_string(o.model);
    if (!needs_poincare(model))
        throw ConfigError("sweep works on the small-parameter models: "
                          "small-sigma, three-dof, two-mass");
    const auto mp = resolve_params(model, o.params);
    const auto base = std::get<huygens::params::PoincareParams>(mp);
    const GridSpec grid = parse_grid(o.grid);
    if (o.workers < 1) throw ConfigError("--workers must be at least 1");

    std::vector<double> values(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i)
        values[i] = grid.count == 1
                        ? grid.lo
                        : grid.lo + (grid.hi - grid.lo) *
                                        static_cast<double>(i) /
                                        static_cast<double>(grid.count - 1);

    std::vector<std::string> rows(grid.count);
    const auto work = [&](std::size_t i) {
        rows[i] = sweep_row(model, base, grid, i, values[i], o.simulate,
                            o.t_end, o.tol);
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(o.workers),
                              std::max<std::size_t>(grid.count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < grid.count; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < grid.count;
                     i = next.fetch_add(1))
                    work(i);
            });
        for (auto& th : pool) th.join();
    }

    std::string csv = kSweepHeader;
    csv += '\n';
    for (const auto& row : rows) {
        csv += row;
        csv += '\n';
    }
    const std::string dir = ensure_dir(maybe_out_dir(o.out).value_or("."));
    huygens::jsonio::write_text_atomic(dir + "/sweep.csv", csv);
    std::printf("wrote %s/sweep.csv (%zu points)\n", dir.c_str(), grid.count);
}

// --- reproduce --------------------------------------------------------

struct ReproduceOpts {
    std::string figure;
    double tol = 1e-9;
    std::string out;
};

void run_reproduce(const ReproduceOpts& o) {
    const auto& fp = huygens::figures::preset(o.figure);
    huygens::dynamics::State x0 = huygens::dynamics::State::Zero(6);
    x0[0] = fp.theta1;
    x0[2] = fp.theta2;
    const auto traj = huygens::dynamics::integrate(
        Model::Dimensionless, x0, fp.dimensionless, fp.cycles * kTwoPi,
        o.tol);
    const auto report = huygens::classify::detect_regime(traj);

    Json j;
    j["figure"] = fp.id;
    j["params"]["dimensionless"] = huygens::jsonio::to_json(fp.dimensionless);
    if (fp.physical)
        j["params"]["physical"] = huygens::jsonio::to_json(*fp.physical);
    j["initial_state"] = std::vector<double>(x0.data(), x0.data() + x0.size());
    j["cycles"] = fp.cycles;
    j["report"] = huygens::jsonio::to_json(report);
    try {
        const auto q = huygens::params::to_poincare(fp.dimensionless);
        Json preds = Json::array();
        for (const auto& p : huygens::poincare::closed_form_regimes(
                 q, Model::ThreeDofSigma))
            preds.push_back(huygens::jsonio::to_json(p));
        j["predictions"] = preds;
    } catch (const huygens::Error& e) {
        j["prediction_error"] = e.what();
    }

    const std::string root = maybe_out_dir(o.out).value_or(".");
    const std::string dir = ensure_dir(root + "/" + fp.id);
    huygens::jsonio::write_csv_atomic(dir + "/trajectory.csv", traj);
    huygens::jsonio::write_text_atomic(dir + "/report.json",
                                       huygens::jsonio::dump(j));

    const std::size_t m = traj.size();
    std::vector<double> cycles(m), th1(m), th2(m), combo(m);
    for (std::size_t k = 0; k < m; ++k) {
        cycles[k] = traj.t[k] / kTwoPi;
        th1[k] = traj.x[k][0];
        th2[k] = traj.x[k][2];
        combo[k] = fp.panel_b == huygens::figures::PanelB::Sum
                       ? th1[k] + th2[k]
                       : th1[k] - th2[k];
    }
    huygens::svg::Panel pa;
    pa.label = "(a)";
    pa.y_label = "angle [rad]";
    pa.lines.push_back({cycles, th1, "#1f77b4", 1.0, "theta1"});
    pa.lines.push_back({cycles, th2, "#d62728", 1.0, "theta2"});
    huygens::svg::Panel pb;
    pb.label = "(b)";
    pb.x_label = "time [pendulum cycles]";
    pb.y_label = fp.panel_b == huygens::figures::PanelB::Sum
                     ? "theta1 + theta2"
                     : "theta1 - theta2";
    pb.lines.push_back({cycles, combo, "#2ca02c", 1.0, ""});
    huygens::jsonio::write_text_atomic(
        dir + "/figure.svg",
        huygens::svg::render(fp.id, {std::move(pa), std::move(pb)}));

    std::printf("%s: %s", fp.id.c_str(),
                huygens::classify::to_string(report.regime));
    if (report.settle_time)
        std::printf(", settled at %.1f cycles", *report.settle_time / kTwoPi);
    std::printf(", beats %s, amplitudes %.4f/%.4f\n",
                report.beats ? "yes" : "no", report.asymptotic_amplitude[0],
                report.asymptotic_amplitude[1]);
    std::printf("wrote %s/{trajectory.csv,report.json,figure.svg}\n",
                dir.c_str());
}

void add_sim_flags(CLI::App* cmd, SimulateOpts& o, bool t_end_required) {
    cmd->add_option("--model", o.model, "model to integrate")
        ->required(t_end_required);
    add_param_flags(cmd, o.params);
    add_ic_flags(cmd, o.ic);
    auto* te = cmd->add_option("--t-end", o.t_end,
                               "integration time [dimensionless units]");
    if (t_end_required) te->required();
    cmd->add_option("--tol", o.tol, "adaptive step tolerance");
    cmd->add_option("--sample-interval", o.sample_interval,
                    "output sample spacing");
    cmd->add_flag("--project-rigid-body", o.project,
                  "remove the neutral frame mode before integrating "
                  "(two-mass)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled pendulum clocks: simulation, regime prediction "
                 "and classification"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* cmd_sim = app.add_subcommand(
        "simulate", "integrate a model and write the trajectory");
    add_sim_flags(cmd_sim, sim, true);
    cmd_sim->add_option("--out", sim.out, "output directory");
    cmd_sim->callback([&] { run_simulate(sim); });

    PredictOpts pre;
    auto* cmd_pre = app.add_subcommand(
        "predict", "closed-form and averaged-equation regime predictions");
    cmd_pre->add_option("--model", pre.model, "small-parameter model")
        ->required();
    add_param_flags(cmd_pre, pre.params);
    cmd_pre->add_option("--out", pre.out, "output directory");
    cmd_pre->callback([&] { run_predict(pre); });

    AnalyzeOpts ana;
    auto* cmd_ana = app.add_subcommand(
        "analyze", "classify a trajectory from CSV or a fresh integration");
    cmd_ana->add_option("--input", ana.input, "trajectory CSV to classify");
    add_sim_flags(cmd_ana, ana.sim, false);
    cmd_ana->add_option("--out", ana.out, "output directory");
    cmd_ana->callback([&] { run_analyze(ana); });

    SweepOpts swp;
    auto* cmd_swp = app.add_subcommand(
        "sweep", "closed-form predictions over a parameter grid");
    cmd_swp->add_option("--model", swp.model, "small-parameter model")
        ->required();
    add_param_flags(cmd_swp, swp.params);
    cmd_swp->add_option("--grid", swp.grid, "axis:lo:hi:count")->required();
    cmd_swp->add_flag("--simulate", swp.simulate,
                      "also integrate each point and classify the regime");
    cmd_swp->add_option("--workers", swp.workers, "worker threads");
    cmd_swp->add_option("--t-end", swp.t_end,
                        "integration time per point with --simulate");
    cmd_swp->add_option("--tol", swp.tol, "adaptive step tolerance");
    cmd_swp->add_option("--out", swp.out, "output directory");
    cmd_swp->callback([&] { run_sweep(swp); });

    ReproduceOpts rep;
    auto* cmd_rep = app.add_subcommand(
        "reproduce", "rerun a bundled figure experiment");
    cmd_rep->add_option("--figure", rep.figure, "figure id, e.g. fig5")
        ->required();
    cmd_rep->add_option("--tol", rep.tol, "adaptive step tolerance");
    cmd_rep->add_option("--out", rep.out, "output directory");
    cmd_rep->callback([&] { run_reproduce(rep); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const huygens::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const huygens::InvalidParameterError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const huygens::ShapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const huygens::InsufficientDataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const huygens::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
