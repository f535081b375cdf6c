#pragma once

#include <string>

#include <json.hpp>

#include "cmc/cost_table.hpp"
#include "cmc/costmodel.hpp"
#include "cmc/crag.hpp"
#include "cmc/features.hpp"

namespace cmc {

using Json = nlohmann::json;

/// Leaves store pixels as row runs {row, col_start, col_end} (col_end
/// inclusive); non-leaves list their children.
Json crag_to_json(const Crag& crag);
Crag crag_from_json(const Json& doc);

/// {"y": {id: 0|1}, "m": {"i-j": 0|1}, "objective": float}
Json solution_to_json(const Crag& crag, const Solution& solution);
/// Throws KeyMismatch unless the keys match the CRAG exactly.
Solution solution_from_json(const Crag& crag, const Json& doc);

/// {"f": {id: float}, "g": {"i-j": float}}
Json costs_to_json(const Crag& crag, const CostTable& costs);
CostTable costs_from_json(const Crag& crag, const Json& doc);

/// {"schema": {"node": [...], "edge": [...]}, "nodes": {id: [...]}, "edges": {"i-j": [...]}}
Json features_to_json(const Crag& crag, const FeatureSet& features);
FeatureSet features_from_json(const Crag& crag, const Json& doc);

Json forest_to_json(const Forest& forest);
Forest forest_from_json(const Json& doc);
Json model_to_json(const CostModel& model);
CostModel model_from_json(const Json& doc);

Json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const Json& doc);

}  // namespace cmc
