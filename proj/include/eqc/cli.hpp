#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eqc/intervention.hpp"
#include "eqc/model.hpp"

namespace eqc {

// Comma-separated clauses `atom=value` or `atom=(v1,v2,...)` for grouped
// atoms; a kappa value switches the spec to soft mode.
InterventionSpec parse_do_clause(const std::string& text, const Model& m,
                                 std::optional<double> kappa = std::nullopt);

// --model resolution: the literal path first, then each directory in the
// colon-separated EQCAUSAL_MODELS search path.
std::string resolve_model_path(const std::string& path);

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 verification failure, 2 usage or parse errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace eqc
