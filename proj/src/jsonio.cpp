#include "huygens/jsonio.hpp"

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "huygens/errors.hpp"

namespace huygens::jsonio {

namespace {

Json complex_list(const std::vector<std::complex<double>>& zs) {
    Json out = Json::array();
    for (const auto& z : zs) out.push_back({{"re", z.real()}, {"im", z.imag()}});
    return out;
}

// Shared tmp-write-then-rename step; `fill` streams the payload.
void replace_file(const std::string& path,
                  const std::function<void(std::ostream&)>& fill) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open '" + tmp + "' for writing");
        fill(out);
        out.flush();
        if (!out) throw ConfigError("short write to '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw ConfigError("cannot rename '" + tmp + "' to '" + path +
                          "': " + ec.message());
    }
}

}  // namespace

Json to_json(const params::PhysicalParams& p) {
    return {{"m", p.m}, {"M", p.M}, {"l", p.l}, {"g", p.g},
            {"c", p.c}, {"k", p.k}, {"e", p.e}, {"gamma", p.gamma},
            {"n", p.n}};
}

Json to_json(const params::DimensionlessParams& p) {
    return {{"sigma", p.sigma},     {"omega2", p.omega2},
            {"beta", p.beta},       {"gamma", p.gamma},
            {"epsilon", p.epsilon}, {"n", p.n}};
}

Json to_json(const params::PoincareParams& p) {
    Json j = {{"mu", p.mu},       {"a", p.a},
              {"sigma", p.sigma}, {"omega", p.omega},
              {"gamma", p.gamma}, {"n", p.n}};
    j["kappa"] = p.kappa ? Json(*p.kappa) : Json(nullptr);
    return j;
}

Json to_json(const params::ThresholdReport& r) {
    return {{"sigma_tilde", r.sigma_tilde},
            {"exist_threshold", r.exist_threshold},
            {"stable_threshold", r.stable_threshold},
            {"a_sigma", r.a_sigma},
            {"branch", params::to_string(r.branch)},
            {"regime_summary", params::to_string(r.regime_summary)}};
}

Json to_json(const classify::SyncRegimeReport& r) {
    Json j;
    j["regime"] = classify::to_string(r.regime);
    j["settle_time"] = r.settle_time ? Json(*r.settle_time) : Json(nullptr);
    j["asymptotic_amplitude"] =
        Json::array({r.asymptotic_amplitude[0], r.asymptotic_amplitude[1]});
    j["measured_period"] = r.measured_period;
    j["period_std_error"] = r.period_std_error;
    j["phase_difference_final"] = r.phase_difference_final;
    j["beat_depth"] = r.beat_depth;
    j["beats"] = r.beats;
    return j;
}

Json to_json(const poincare::RegimePrediction& p) {
    Json j;
    j["regime"] = poincare::to_string(p.regime);
    j["source"] = poincare::to_string(p.source);
    j["exists"] = p.exists;
    j["amplitude"] = p.amplitude;
    j["period"] = p.period;
    j["delta1"] = p.delta1;
    j["stable"] = p.stable ? Json(*p.stable) : Json(nullptr);
    return j;
}

Json to_json(const poincare::PoincareSolution& s) {
    Json j;
    j["regime"] = poincare::to_string(s.regime);
    j["r"] = s.r;
    j["phi"] = s.phi;
    j["amplitude"] = 2.0 * s.r;
    j["delta1"] = s.delta1;
    j["period"] = s.period;
    j["stable"] = s.stable;
    j["iterations"] = s.iterations;
    Json alphas = Json::array();
    for (Eigen::Index i = 0; i < s.alphas.size(); ++i)
        alphas.push_back(
            {{"re", s.alphas[i].real()}, {"im", s.alphas[i].imag()}});
    j["alphas"] = alphas;
    j["leading_roots"] = complex_list(s.leading_roots);
    j["nonspecial_roots"] = complex_list(s.nonspecial_roots);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text_atomic(const std::string& path, const std::string& text) {
    replace_file(path, [&](std::ostream& out) {
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
    });
}

void write_csv_atomic(const std::string& path,
                      const dynamics::Trajectory& traj) {
    replace_file(path,
                 [&](std::ostream& out) { dynamics::write_csv(out, traj); });
}

}  // namespace huygens::jsonio
