#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "kirchnorm/regime.hpp"
#include "kirchnorm/solver.hpp"

namespace kirchnorm {

nlohmann::json to_json(const ProblemParams& p);
ProblemParams params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NormTuple& t);
nlohmann::json to_json(const ThresholdSet& t);
nlohmann::json to_json(const FlowResult& r);
nlohmann::json to_json(const PathReport& r);
nlohmann::json to_json(const WPathReport& r);
nlohmann::json to_json(const CheckResult& c);
nlohmann::json to_json(const RegimeReport& r);

// FNV-1a over the canonical (sorted-key, fixed-format) dump of a config.
std::uint64_t config_hash(const nlohmann::json& config);

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis);

} // namespace kirchnorm
