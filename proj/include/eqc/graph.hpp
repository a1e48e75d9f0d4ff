#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "eqc/model.hpp"

namespace eqc {

// Directed graph over atoms. Edges exclude self-loops, which are carried
// by the per-node flag instead.
struct CausalGraph {
  std::vector<std::string> nodes;
  std::set<std::pair<int, int>> edges;  // (from, to), from != to
  std::vector<bool> self_loop;

  bool operator==(const CausalGraph&) const = default;
  bool has_edge(const std::string& from, const std::string& to) const;
  int node_index(const std::string& name) const;
};

// pa(a) = atoms whose member variables occur syntactically in the RHS of
// some member of a. Includes a itself when it self-references.
std::map<std::string, std::set<std::string>> structural_parents(const Model& m);

CausalGraph graph_of(const Model& m);

// Numeric dependence lint: an edge a->b is flagged vacuous when perturbing
// members of a never changes any RHS of b over `n_states` random probes.
// Diagnostic only; syntactic dependence remains the parent criterion.
struct VacuousEdge {
  std::string from, to;
};
std::vector<VacuousEdge> vacuous_edges(const Model& m, int n_states,
                                       unsigned seed);

}  // namespace eqc
