#include "huygens/figures.hpp"

#include <map>
#include <sstream>
#include <string>

#include "figures_data.hpp"

namespace huygens::figures {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw ConfigError("figure table: bad number for '" + key +
                          "': " + value);
    return x;
}

using Section = std::map<std::string, std::string>;

// The embedded table is `key = value` lines under [figN] section headers,
// with '#' comments; `version` is the only top-level key.
std::map<std::string, Section> parse_sections(const std::string& text) {
    std::map<std::string, Section> sections;
    Section* current = nullptr;
    std::istringstream in(text);
    std::string line;
    std::string version;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("figure table line " +
                                  std::to_string(lineno) +
                                  ": unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (sections.count(name))
                throw ConfigError("figure table: duplicate section " + name);
            current = &sections[name];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("figure table line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("figure table line " + std::to_string(lineno) +
                              ": empty key or value");
        if (!current) {
            if (key == "version") {
                version = value;
                continue;
            }
            throw ConfigError("figure table: key '" + key +
                              "' outside any section");
        }
        if (current->count(key))
            throw ConfigError("figure table: duplicate key '" + key + "'");
        (*current)[key] = value;
    }
    if (version != "1")
        throw ConfigError("figure table: unsupported version '" + version +
                          "'");
    return sections;
}

FigurePreset build_preset(const std::string& id, Section fields) {
    FigurePreset fp;
    fp.id = id;
    auto take = [&](const char* key) {
        const auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("figure table [" + id + "]: missing key '" +
                              key + "'");
        const double x = to_number(key, it->second);
        fields.erase(it);
        return x;
    };
    auto take_string = [&](const char* key) {
        const auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("figure table [" + id + "]: missing key '" +
                              key + "'");
        std::string s = it->second;
        fields.erase(it);
        return s;
    };

    const std::string layer = take_string("layer");
    if (layer == "dimensionless") {
        fp.dimensionless.sigma = take("sigma");
        fp.dimensionless.omega2 = take("omega2");
        fp.dimensionless.beta = take("beta");
        fp.dimensionless.gamma = take("gamma");
        fp.dimensionless.epsilon = take("epsilon");
    } else if (layer == "physical") {
        params::PhysicalParams ph;
        ph.m = take("m");
        ph.M = take("M");
        ph.l = take("l");
        ph.g = take("g");
        ph.c = take("c");
        ph.k = take("k");
        ph.gamma = take("gamma");
        // the table stores the escapement in dimensionless form
        ph.e = take("epsilon") * ph.m * ph.g * ph.l;
        fp.physical = ph;
        fp.dimensionless = params::to_dimensionless(ph);
    } else {
        throw ConfigError("figure table [" + id + "]: unknown layer '" +
                          layer + "'");
    }
    fp.dimensionless.validate();

    fp.theta1 = take("theta1");
    fp.theta2 = take("theta2");
    fp.cycles = take("cycles");
    if (!(fp.cycles > 0))
        throw ConfigError("figure table [" + id + "]: cycles must be > 0");
    const std::string panel = take_string("panel_b");
    if (panel == "sum")
        fp.panel_b = PanelB::Sum;
    else if (panel == "diff")
        fp.panel_b = PanelB::Diff;
    else
        throw ConfigError("figure table [" + id + "]: unknown panel_b '" +
                          panel + "'");

    if (!fields.empty())
        throw ConfigError("figure table [" + id + "]: unknown key '" +
                          fields.begin()->first + "'");
    return fp;
}

std::vector<FigurePreset> parse_table(const std::string& text) {
    std::vector<FigurePreset> out;
    for (auto& [name, fields] : parse_sections(text))
        out.push_back(build_preset(name, std::move(fields)));
    return out;
}

}  // namespace

const std::vector<FigurePreset>& presets() {
    static const std::vector<FigurePreset> table =
        parse_table(figures_detail::kFigureData);
    return table;
}

const FigurePreset& preset(const std::string& id) {
    for (const auto& fp : presets())
        if (fp.id == id) return fp;
    throw ConfigError("unknown figure id '" + id + "'");
}

}  // namespace huygens::figures
