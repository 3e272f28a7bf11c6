#include "pcurve/json_io.hpp"

namespace pcurve {

using nlohmann::ordered_json;

ordered_json to_json(const TestResult& result) {
  ordered_json j;
  j["test"] = result.test;
  j["statistic"] = result.statistic;
  j["p_value"] = result.p_value;
  j["reference"] = result.reference;
  j["not_applicable"] = result.not_applicable;
  j["diagnostics"] = ordered_json::object();
  for (const auto& [k, v] : result.diagnostics) j["diagnostics"][k] = v;
  j["notes"] = ordered_json::object();
  for (const auto& [k, v] : result.notes) j["notes"][k] = v;
  return j;
}

ordered_json to_json(const SummaryRecord& record) {
  ordered_json j;
  j["n_total"] = record.n_total;
  j["n_04_05"] = record.n_04_05;
  j["n_0_015"] = record.n_0_015;
  j["n_clusters"] = record.n_clusters;
  j["n_rounded"] = record.n_rounded;
  j["n_converted"] = record.n_converted;
  return j;
}

ordered_json to_json(const Proportions& prop) {
  ordered_json j;
  j["counts"] = prop.counts;
  j["pi_hat"] = prop.pi_hat;
  j["n_effective"] = prop.n_effective;
  j["n_total"] = prop.n_total;
  j["G_alpha_hat"] = prop.G_alpha_hat;
  return j;
}

ordered_json to_json(const LcmQuantileTable& table, bool include_draws) {
  ordered_json j;
  j["m"] = table.m;
  j["R"] = table.R;
  j["seed"] = table.seed;
  j["levels"] = table.levels;
  j["quantiles"] = table.quantiles;
  if (include_draws) j["sorted_draws"] = table.sorted_draws;
  return j;
}

LcmQuantileTable lcm_table_from_json(const nlohmann::json& j) {
  LcmQuantileTable t;
  t.m = j.at("m").get<int>();
  t.R = j.at("R").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.levels = j.at("levels").get<std::vector<double>>();
  t.quantiles = j.at("quantiles").get<std::vector<double>>();
  if (j.contains("sorted_draws"))
    t.sorted_draws = j.at("sorted_draws").get<std::vector<double>>();
  if (t.levels.size() != t.quantiles.size())
    throw std::invalid_argument("lcm_table_from_json: levels/quantiles size");
  if (!std::is_sorted(t.sorted_draws.begin(), t.sorted_draws.end()))
    throw std::invalid_argument("lcm_table_from_json: draws not sorted");
  return t;
}

} // namespace pcurve
