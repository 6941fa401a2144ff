#pragma once

#include <optional>
#include <string>
#include <vector>

#include "huygens/errors.hpp"
#include "huygens/params.hpp"

namespace huygens::figures {

enum class PanelB { Sum, Diff };

// One row of the figure table: everything `reproduce` needs to rerun a
// figure experiment. Physical presets keep their SI values and carry the
// converted dimensionless set alongside; dimensionless presets leave
// `physical` empty.
struct FigurePreset {
    std::string id;
    params::DimensionlessParams dimensionless;
    std::optional<params::PhysicalParams> physical;
    double theta1 = 0;
    double theta2 = 0;
    double cycles = 0;
    PanelB panel_b = PanelB::Sum;
};

// The figure table embedded at configure time, parsed once, in file order.
const std::vector<FigurePreset>& presets();

// Lookup by id ("fig2".."fig7"); ConfigError for ids outside the table.
const FigurePreset& preset(const std::string& id);

}  // namespace huygens::figures
