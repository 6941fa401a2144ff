#pragma once

#include <json.hpp>
#include <string>

#include "huygens/classify.hpp"
#include "huygens/dynamics.hpp"
#include "huygens/params.hpp"
#include "huygens/poincare.hpp"

namespace huygens::jsonio {

using Json = nlohmann::ordered_json;

Json to_json(const params::PhysicalParams& p);
Json to_json(const params::DimensionlessParams& p);
Json to_json(const params::PoincareParams& p);
Json to_json(const params::ThresholdReport& r);
Json to_json(const classify::SyncRegimeReport& r);
Json to_json(const poincare::RegimePrediction& p);
Json to_json(const poincare::PoincareSolution& s);

// 2-space indent plus a trailing newline; doubles round-trip exactly.
std::string dump(const Json& j);

// Writes to `path + ".tmp"` in the same directory and renames over the
// target, so readers never observe a half-written file. Throws ConfigError
// when the path cannot be opened or renamed.
void write_text_atomic(const std::string& path, const std::string& text);

void write_csv_atomic(const std::string& path,
                      const dynamics::Trajectory& traj);

}  // namespace huygens::jsonio
