#pragma once

#include <nlohmann/json.hpp>

#include "pcurve/estimators.hpp"
#include "pcurve/hypothesis_tests.hpp"
#include "pcurve/ingest.hpp"

namespace pcurve {

nlohmann::ordered_json to_json(const TestResult& result);
nlohmann::ordered_json to_json(const SummaryRecord& record);
nlohmann::ordered_json to_json(const Proportions& prop);
nlohmann::ordered_json to_json(const LcmQuantileTable& table,
                               bool include_draws = true);
LcmQuantileTable lcm_table_from_json(const nlohmann::json& j);

} // namespace pcurve
