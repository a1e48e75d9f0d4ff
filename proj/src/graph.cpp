#include "eqc/graph.hpp"

#include <cmath>
#include <random>

namespace eqc {

bool CausalGraph::has_edge(const std::string& from, const std::string& to) const {
  int f = node_index(from), t = node_index(to);
  if (f < 0 || t < 0) return false;
  return edges.count({f, t}) > 0;
}

int CausalGraph::node_index(const std::string& name) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == name) return static_cast<int>(i);
  return -1;
}

std::map<std::string, std::set<std::string>> structural_parents(const Model& m) {
  std::map<std::string, std::set<std::string>> pa;
  for (const Atom& a : m.atoms()) {
    std::set<std::string>& parents = pa[a.name];
    for (int slot : a.members) {
      for (const std::string& ref : free_vars(m.rhs(slot))) {
        int rslot = m.var_slot(ref);
        if (rslot >= 0) parents.insert(m.atoms()[m.atom_of_var(rslot)].name);
      }
    }
  }
  return pa;
}

CausalGraph graph_of(const Model& m) {
  CausalGraph g;
  for (const Atom& a : m.atoms()) g.nodes.push_back(a.name);
  g.self_loop.assign(g.nodes.size(), false);
  auto pa = structural_parents(m);
  for (int child = 0; child < static_cast<int>(m.atoms().size()); ++child) {
    for (const std::string& parent : pa[m.atoms()[child].name]) {
      int p = m.atom_index(parent);
      if (p == child)
        g.self_loop[child] = true;
      else
        g.edges.insert({p, child});
    }
  }
  return g;
}

std::vector<VacuousEdge> vacuous_edges(const Model& m, int n_states,
                                       unsigned seed) {
  std::vector<VacuousEdge> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> scratch(static_cast<size_t>(m.scratch_size()));
  std::vector<double> f0(m.n_vars()), f1(m.n_vars());

  auto pa = structural_parents(m);
  for (const Atom& child : m.atoms()) {
    for (const std::string& parent_name : pa[child.name]) {
      const Atom& parent = m.atoms()[m.atom_index(parent_name)];
      bool moved = false;
      for (int s = 0; s < n_states && !moved; ++s) {
        std::vector<double> x(m.n_vars());
        for (int i = 0; i < m.n_vars(); ++i) {
          const VarDecl& v = m.vars()[i];
          double lo = std::max(v.lo, v.init - 2.0);
          double hi = std::min(v.hi, v.init + 2.0);
          x[i] = lo + (hi - lo) * unit(rng);
        }
        double delta = 0.5 + unit(rng);
        std::vector<double> xp = x;
        for (int slot : parent.members) xp[slot] += delta;
        try {
          m.eval_rhs(x, f0, scratch);
          m.eval_rhs(xp, f1, scratch);
        } catch (const EvalError&) {
          continue;  // singular probe point; try another state
        }
        for (int slot : child.members) {
          // tolerance absorbs re-association noise from cancelled terms
          double scale = 1.0 + std::fabs(f0[slot]) + std::fabs(f1[slot]);
          if (std::isfinite(f0[slot]) && std::isfinite(f1[slot]) &&
              std::fabs(f1[slot] - f0[slot]) > 1e-9 * scale) {
            moved = true;
            break;
          }
        }
      }
      if (!moved) out.push_back({parent.name, child.name});
    }
  }
  return out;
}

}  // namespace eqc
