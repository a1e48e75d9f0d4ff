#pragma once

#include <json.hpp>
#include <string>

#include "eqc/pipeline.hpp"

namespace eqc {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

Json state_to_json(const Model& m, const std::vector<double>& x);

Json to_json(const Model& m, const CausalGraph& g);
Json to_json(const Model& m, const EquilibriumReport& rep);
Json to_json(const Model& m, const SolveReport& rep);
Json to_json(const Lee& e);
Json to_json(const Scm& scm);
Json to_json(const DiagramReport& rep);
Json to_json(const Model& m, const std::vector<WrtResult>& results);

// t column first, then one column per scalar variable in declaration order
std::string trajectory_csv(const Model& m, const Trajectory& traj);

}  // namespace eqc
