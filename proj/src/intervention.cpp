#include "eqc/intervention.hpp"

#include "eqc/errors.hpp"

namespace eqc {

std::string InterventionSpec::describe() const {
  if (targets.empty()) return "do()";
  std::string out = "do(";
  for (size_t i = 0; i < targets.size(); ++i) {
    if (i) out += ", ";
    out += targets[i] + "=...";
  }
  out += ")";
  if (mode == Mode::soft) out += " soft kappa=" + format_double(kappa);
  return out;
}

std::vector<int> check_intervention(const Model& m, const InterventionSpec& s) {
  if (s.mode == InterventionSpec::Mode::soft && !(s.kappa > 0.0))
    throw ModelError("soft intervention requires kappa > 0");
  std::vector<int> slots;
  for (const std::string& t : s.targets) {
    int ai = m.atom_index(t);
    if (ai < 0) throw ModelError("unknown intervention target: " + t);
    for (int slot : m.atoms()[ai].members) {
      const VarDecl& v = m.vars()[slot];
      auto it = s.values.find(v.name);
      if (it == s.values.end())
        throw ModelError("intervention on " + t + " missing value for member " +
                         v.name);
      if (s.mode == InterventionSpec::Mode::hard &&
          !(it->second >= v.lo && it->second <= v.hi))
        throw ModelError("clamp value for " + v.name +
                         " violates declared domain");
      slots.push_back(slot);
    }
  }
  return slots;
}

Model apply_hard_intervention(const Model& m, const InterventionSpec& s) {
  if (s.mode != InterventionSpec::Mode::hard)
    throw ModelError("apply_hard_intervention requires a hard InterventionSpec");
  std::vector<int> slots = check_intervention(m, s);
  std::map<std::string, ExprPtr> rhs;
  std::map<std::string, double> inits;
  for (int slot : slots) {
    const std::string& v = m.vars()[slot].name;
    rhs[v] = Expr::number(0.0);
    inits[v] = s.values.at(v);
  }
  return m.with_rhs(std::move(rhs), std::move(inits));
}

Model apply_soft_intervention(const Model& m, const InterventionSpec& s) {
  if (s.mode != InterventionSpec::Mode::soft)
    throw ModelError("apply_soft_intervention requires a soft InterventionSpec");
  std::vector<int> slots = check_intervention(m, s);
  std::map<std::string, ExprPtr> rhs;
  for (int slot : slots) {
    const std::string& v = m.vars()[slot].name;
    // rhs + kappa*(xi - x)
    ExprPtr feedback = Expr::binary(
        BinOp::mul, Expr::number(s.kappa),
        Expr::binary(BinOp::sub, Expr::number(s.values.at(v)), Expr::var(v)));
    rhs[v] = Expr::binary(BinOp::add, m.rhs(slot), feedback);
  }
  return m.with_rhs(std::move(rhs), {});
}

}  // namespace eqc
