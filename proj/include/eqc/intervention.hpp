#pragma once

#include <map>
#include <string>
#include <vector>

#include "eqc/model.hpp"

namespace eqc {

// do(X_I = xi_I): clamp the member variables of the target atoms to fixed
// values, either ideally (hard) or through feedback of gain kappa (soft).
struct InterventionSpec {
  enum class Mode { hard, soft };
  Mode mode = Mode::hard;
  double kappa = 0.0;  // soft only, > 0
  std::vector<std::string> targets;        // atom names
  std::map<std::string, double> values;    // member variable -> clamp value

  bool empty() const { return targets.empty(); }
  std::string describe() const;
};

// Member RHS becomes the literal 0 and the init becomes the clamp value;
// the parent sets of the targets collapse to the empty set.
Model apply_hard_intervention(const Model& m, const InterventionSpec& s);

// Member RHS becomes rhs + kappa*(xi - x); inits are unchanged.
Model apply_soft_intervention(const Model& m, const InterventionSpec& s);

// Shared validation: targets are atoms of m, every member variable of a
// target carries a value. Hard mode also rejects values outside the
// declared domain. Returns the clamped variable slots.
std::vector<int> check_intervention(const Model& m, const InterventionSpec& s);

}  // namespace eqc
