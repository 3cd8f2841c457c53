#pragma once

#include <string>

#include "frictionlab/arbitrage.hpp"
#include "frictionlab/superhedge.hpp"
#include "frictionlab/utility.hpp"
#include "frictionlab/wealth.hpp"

// Single-header nlohmann/json from vendor/.
#include <json.hpp>

namespace frictionlab::io {

using json = nlohmann::ordered_json;

json to_json(const FrictionSpec& spec);
FrictionSpec friction_from_json(const json& j);

json to_json(const TimeGrid& grid);
TimeGrid grid_from_json(const json& j);

json to_json(const ScenarioTree& tree);
ScenarioTree tree_from_json(const json& j);

json to_json(const ScenarioTree& tree, const TradingRatePlan& plan);
TradingRatePlan plan_from_json(const ScenarioTree& tree, const json& j);

json to_json(const ScenarioTree& tree, const Claim& claim);
Claim claim_from_json(const ScenarioTree& tree, const json& j);

json to_json(const ScenarioTree& tree, const MartingaleCertificate& cert);
MartingaleCertificate certificate_from_json(const ScenarioTree& tree, const json& j);

json to_json(const UtilitySpec& utility);
UtilitySpec utility_from_json(const json& j);

json to_json(const ScenarioTree& tree, const SolveReport& report);
json to_json(const ScenarioTree& tree, const Na2Report& report);
json to_json(const ScenarioTree& tree, const FocReport& report);

json load_json(const std::string& path);
void save_json(const json& j, const std::string& path);

/// Ensemble persistence: binary matrix file plus a JSON metadata sidecar
/// ("<path>.json").
void save_ensemble(const PathEnsemble& ensemble, const std::string& path);
PathEnsemble load_ensemble(const std::string& path);

/// Path-form plans persist as bare binary matrices.
void save_plan_matrix(const TradingRatePlan& plan, const std::string& path);
TradingRatePlan load_plan_matrix(const std::string& path);

/// FNV-1a-64 content hash used for report fingerprints.
std::string fingerprint_file(const std::string& path);
std::string fingerprint_bytes(const void* data, std::size_t size);

}  // namespace frictionlab::io
