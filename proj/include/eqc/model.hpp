#pragma once

#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eqc/expr.hpp"

namespace eqc {

struct VarDecl {
  std::string name;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double init = 0.0;
};

struct Group {
  std::string name;
  std::vector<std::string> members;
};

// Intervention/causal unit: a declared group, or a single ungrouped
// variable. `members` are slots into the model's variable order.
struct Atom {
  std::string name;
  std::vector<int> members;
  bool grouped = false;
};

// A first-order ODE system over named scalar variables. Immutable after
// construction; construction validates declarations, resolves identifier
// references and compiles each right-hand side for fast evaluation.
class Model {
 public:
  Model(std::string name, std::vector<std::pair<std::string, double>> params,
        std::vector<VarDecl> vars, std::vector<Group> groups,
        std::map<std::string, ExprPtr> rhs);

  const std::string& name() const { return name_; }
  const std::vector<std::pair<std::string, double>>& params() const {
    return params_;
  }
  const std::map<std::string, double>& param_map() const { return param_map_; }
  const std::vector<VarDecl>& vars() const { return vars_; }
  const std::vector<Group>& groups() const { return groups_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  int n_vars() const { return static_cast<int>(vars_.size()); }
  int var_slot(const std::string& name) const;        // -1 if unknown
  int atom_index(const std::string& name) const;      // -1 if unknown
  int atom_of_var(int slot) const { return var_atom_[slot]; }
  const std::map<std::string, int>& var_slots() const { return var_slots_; }

  const ExprPtr& rhs(int slot) const { return rhs_[slot]; }
  const ExprPtr& rhs(const std::string& var) const;

  // f(state) for all variables; scratch must hold scratch_size() doubles.
  void eval_rhs(std::span<const double> state, std::span<double> out,
                std::span<double> scratch) const;
  int scratch_size() const { return scratch_size_; }

  std::vector<double> initial_state() const;
  bool in_domain(std::span<const double> state, double slack = 0.0) const;

  // whether the stored RHS of this variable is the literal constant 0,
  // i.e. the variable is clamped by a perfect intervention (or authored
  // with frozen dynamics)
  bool rhs_is_zero(int slot) const;

  Model with_rhs(std::map<std::string, ExprPtr> new_rhs,
                 std::map<std::string, double> new_inits) const;

 private:
  std::string name_;
  std::vector<std::pair<std::string, double>> params_;
  std::map<std::string, double> param_map_;
  std::vector<VarDecl> vars_;
  std::vector<Group> groups_;
  std::vector<Atom> atoms_;
  std::vector<ExprPtr> rhs_;
  std::vector<CompiledExpr> compiled_;
  std::map<std::string, int> var_slots_;
  std::map<std::string, int> atom_slots_;
  std::vector<int> var_atom_;
  int scratch_size_ = 1;
};

bool model_equal(const Model& a, const Model& b);

// Canonical model-file rendering; parses back to a structurally equal model.
std::string to_text(const Model& m);

}  // namespace eqc
