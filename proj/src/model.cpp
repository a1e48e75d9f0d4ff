#include "eqc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eqc/errors.hpp"

namespace eqc {

namespace {

// resolve ident nodes to var/param against the declarations
ExprPtr resolve(const ExprPtr& e, const std::map<std::string, int>& var_slots,
                const std::map<std::string, double>& params) {
  switch (e->kind()) {
    case Expr::Kind::ident: {
      if (var_slots.count(e->name())) return Expr::var(e->name());
      if (params.count(e->name())) return Expr::param(e->name());
      throw ModelError("undeclared identifier: " + e->name());
    }
    case Expr::Kind::var:
      if (!var_slots.count(e->name()))
        throw ModelError("undeclared variable: " + e->name());
      return e;
    case Expr::Kind::param:
      if (!params.count(e->name()))
        throw ModelError("undeclared parameter: " + e->name());
      return e;
    case Expr::Kind::unary: {
      auto a = resolve(e->operand(), var_slots, params);
      return a.get() == e->operand().get() ? e : Expr::unary(e->un_op(), a);
    }
    case Expr::Kind::binary: {
      auto l = resolve(e->lhs(), var_slots, params);
      auto r = resolve(e->rhs(), var_slots, params);
      if (l.get() == e->lhs().get() && r.get() == e->rhs().get()) return e;
      return Expr::binary(e->bin_op(), l, r);
    }
    case Expr::Kind::call: {
      auto a = resolve(e->operand(), var_slots, params);
      return a.get() == e->operand().get() ? e : Expr::call(e->fn(), a);
    }
    default:
      return e;
  }
}

}  // namespace

Model::Model(std::string name,
             std::vector<std::pair<std::string, double>> params,
             std::vector<VarDecl> vars, std::vector<Group> groups,
             std::map<std::string, ExprPtr> rhs)
    : name_(std::move(name)),
      params_(std::move(params)),
      vars_(std::move(vars)),
      groups_(std::move(groups)) {
  for (const auto& [p, v] : params_) {
    if (!param_map_.emplace(p, v).second)
      throw ModelError("duplicate parameter: " + p);
  }
  for (int i = 0; i < static_cast<int>(vars_.size()); ++i) {
    const VarDecl& v = vars_[i];
    if (!var_slots_.emplace(v.name, i).second)
      throw ModelError("duplicate variable: " + v.name);
    if (param_map_.count(v.name))
      throw ModelError("name declared as both param and var: " + v.name);
    if (!(v.lo <= v.hi))
      throw ModelError("empty domain for variable: " + v.name);
    if (!(v.init >= v.lo && v.init <= v.hi))
      throw ModelError("init outside declared domain for variable: " + v.name);
  }
  if (vars_.empty()) throw ModelError("model has no variables");

  // group membership: members exist, disjoint across groups
  var_atom_.assign(vars_.size(), -1);
  std::vector<int> member_group(vars_.size(), -1);
  for (int g = 0; g < static_cast<int>(groups_.size()); ++g) {
    const Group& grp = groups_[g];
    if (grp.members.empty())
      throw ModelError("empty group: " + grp.name);
    if (var_slots_.count(grp.name) || param_map_.count(grp.name))
      throw ModelError("group name collides with a declaration: " + grp.name);
    for (const std::string& mv : grp.members) {
      int slot = var_slot(mv);
      if (slot < 0)
        throw ModelError("group member missing: " + mv + " in group " +
                         grp.name);
      if (member_group[slot] >= 0)
        throw ModelError("variable in more than one group: " + mv);
      member_group[slot] = g;
    }
  }

  // atoms: groups plus ungrouped variables, ordered by first member slot
  std::vector<char> group_seen(groups_.size(), 0);
  for (int slot = 0; slot < n_vars(); ++slot) {
    int g = member_group[slot];
    if (g < 0) {
      Atom a;
      a.name = vars_[slot].name;
      a.members = {slot};
      atoms_.push_back(std::move(a));
    } else if (!group_seen[g]) {
      group_seen[g] = 1;
      Atom a;
      a.name = groups_[g].name;
      a.grouped = true;
      for (const std::string& mv : groups_[g].members)
        a.members.push_back(var_slot(mv));
      atoms_.push_back(std::move(a));
    }
  }
  for (int ai = 0; ai < static_cast<int>(atoms_.size()); ++ai) {
    if (!atom_slots_.emplace(atoms_[ai].name, ai).second)
      throw ModelError("duplicate atom name: " + atoms_[ai].name);
    for (int slot : atoms_[ai].members) var_atom_[slot] = ai;
  }

  // exactly one RHS per variable, resolve + compile
  rhs_.resize(vars_.size());
  compiled_.resize(vars_.size());
  for (auto& [vname, e] : rhs) {
    int slot = var_slot(vname);
    if (slot < 0)
      throw ModelError("equation for undeclared variable: " + vname);
    rhs_[slot] = resolve(e, var_slots_, param_map_);
  }
  for (int i = 0; i < n_vars(); ++i) {
    if (!rhs_[i])
      throw ModelError("missing equation for variable: " + vars_[i].name);
    compiled_[i] = CompiledExpr(rhs_[i], var_slots_, param_map_);
    scratch_size_ = std::max(scratch_size_, compiled_[i].stack_depth());
  }
}

int Model::var_slot(const std::string& name) const {
  auto it = var_slots_.find(name);
  return it == var_slots_.end() ? -1 : it->second;
}

int Model::atom_index(const std::string& name) const {
  auto it = atom_slots_.find(name);
  return it == atom_slots_.end() ? -1 : it->second;
}

const ExprPtr& Model::rhs(const std::string& var) const {
  int slot = var_slot(var);
  if (slot < 0) throw ModelError("unknown variable: " + var);
  return rhs_[slot];
}

void Model::eval_rhs(std::span<const double> state, std::span<double> out,
                     std::span<double> scratch) const {
  for (int i = 0; i < n_vars(); ++i)
    out[i] = compiled_[i].eval(state, scratch.data());
}

std::vector<double> Model::initial_state() const {
  std::vector<double> x(vars_.size());
  for (size_t i = 0; i < vars_.size(); ++i) x[i] = vars_[i].init;
  return x;
}

bool Model::in_domain(std::span<const double> state, double slack) const {
  for (size_t i = 0; i < vars_.size(); ++i) {
    if (state[i] < vars_[i].lo - slack || state[i] > vars_[i].hi + slack)
      return false;
  }
  return true;
}

bool Model::rhs_is_zero(int slot) const {
  const ExprPtr& e = rhs_[slot];
  return e->kind() == Expr::Kind::constant && e->value() == 0.0;
}

Model Model::with_rhs(std::map<std::string, ExprPtr> new_rhs,
                      std::map<std::string, double> new_inits) const {
  std::map<std::string, ExprPtr> rhs;
  for (int i = 0; i < n_vars(); ++i) rhs[vars_[i].name] = rhs_[i];
  for (auto& [v, e] : new_rhs) {
    if (var_slot(v) < 0) throw ModelError("unknown variable: " + v);
    rhs[v] = std::move(e);
  }
  std::vector<VarDecl> vars = vars_;
  for (auto& [v, x] : new_inits) {
    int slot = var_slot(v);
    if (slot < 0) throw ModelError("unknown variable: " + v);
    vars[slot].init = x;
  }
  return Model(name_, params_, std::move(vars), groups_, std::move(rhs));
}

bool model_equal(const Model& a, const Model& b) {
  if (a.name() != b.name()) return false;
  if (a.params() != b.params()) return false;
  if (a.vars().size() != b.vars().size()) return false;
  for (size_t i = 0; i < a.vars().size(); ++i) {
    const VarDecl &x = a.vars()[i], &y = b.vars()[i];
    if (x.name != y.name || x.init != y.init) return false;
    // bounds compared as values; ±inf compares equal to itself
    if (!(x.lo == y.lo || (std::isinf(x.lo) && std::isinf(y.lo) &&
                           std::signbit(x.lo) == std::signbit(y.lo))))
      return false;
    if (!(x.hi == y.hi || (std::isinf(x.hi) && std::isinf(y.hi) &&
                           std::signbit(x.hi) == std::signbit(y.hi))))
      return false;
  }
  if (a.groups().size() != b.groups().size()) return false;
  for (size_t i = 0; i < a.groups().size(); ++i) {
    if (a.groups()[i].name != b.groups()[i].name ||
        a.groups()[i].members != b.groups()[i].members)
      return false;
  }
  for (int i = 0; i < a.n_vars(); ++i)
    if (!expr_equal(a.rhs(i), b.rhs(i))) return false;
  return true;
}

namespace {

std::string bound_text(double v) {
  if (std::isinf(v)) return std::signbit(v) ? "-inf" : "inf";
  return format_double(v);
}

}  // namespace

std::string to_text(const Model& m) {
  std::string out = "model " + m.name() + "\n";
  for (const auto& [p, v] : m.params())
    out += "param " + p + " = " + format_double(v) + "\n";
  for (const VarDecl& v : m.vars()) {
    out += "var " + v.name + " in [" + bound_text(v.lo) + ", " +
           bound_text(v.hi) + "] init " + format_double(v.init) + "\n";
  }
  for (const Group& g : m.groups()) {
    out += "group " + g.name + " = (";
    for (size_t i = 0; i < g.members.size(); ++i) {
      if (i) out += ", ";
      out += g.members[i];
    }
    out += ")\n";
  }
  for (const VarDecl& v : m.vars())
    out += "ddt " + v.name + " = " + to_text(m.rhs(m.var_slot(v.name))) + "\n";
  return out;
}

}  // namespace eqc
