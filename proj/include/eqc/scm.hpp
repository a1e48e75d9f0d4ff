#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqc/lee.hpp"

namespace eqc {

// Structural function X_i = h_i(X_pa(i)). The parent set never contains
// the atom itself. Closed form is used when the atom's residuals are
// affine in its own member variables with constant invertible coefficient
// matrix; otherwise the function is implicit: evaluation solves the
// captured equation for the atom's members at the given parent values.
struct StructuralFn {
  enum class Kind { closed, implicit };

  std::string atom;
  std::set<std::string> parents;   // atom names, excludes `atom`
  Kind kind = Kind::closed;
  std::vector<ExprPtr> closed;     // one component per member variable
  std::vector<ExprPtr> residual;   // captured g_i (used when implicit)
  SolveSettings solver;            // implicit evaluation settings
};

class Scm {
 public:
  Scm(Lee source, std::vector<StructuralFn> fns);

  const Lee& source() const { return source_; }
  const Model& space() const { return source_.system(); }
  const std::vector<StructuralFn>& fns() const { return fns_; }
  const StructuralFn& fn(const std::string& atom) const;

  // h_i at a full state vector (only parent members are read). Implicit
  // functions solve on demand; non-unique inner solves raise EvalError.
  std::vector<double> eval_fn(int atom_index,
                              std::span<const double> state) const;

  CausalGraph graph() const;
  bool acyclic() const;
  std::optional<std::vector<int>> topo_order() const;  // atom indices

 private:
  Lee source_;
  std::vector<StructuralFn> fns_;
  // per atom, per member component; built once at construction
  std::vector<std::vector<CompiledExpr>> compiled_;
  int scratch_size_ = 1;
};

struct SolvabilitySettings {
  int xi_draws = 8;
  unsigned seed = 1;
  double box_halfwidth = 5.0;
  SolveSettings solve;  // sampled route

  SolvabilitySettings() {
    solve.n_starts = 16;
  }
};

struct AtomSolvability {
  std::string atom;
  bool ok = false;
  std::string method;  // "exact-affine" | "sampled" | "sampled-coefficient"
  std::map<std::string, double> witness;  // clamp values exhibiting failure
  std::string note;
};

struct SolvabilityReport {
  std::vector<AtomSolvability> atoms;
  bool ok = false;
  const AtomSolvability* first_failure() const;
};

// Definition-9 style check: for each atom, the equations intervened on all
// other atoms must determine the atom uniquely. Affine equations with
// constant coefficients are decided exactly; affine equations whose
// coefficients depend on parents are scanned for a vanishing coefficient
// determinant (sign changes are bisected to produce a witness); everything
// else falls back to sampled clamp-and-solve.
SolvabilityReport check_structural_solvability(
    const Lee& e, const SolvabilitySettings& s = {});
SolvabilityReport check_structural_solvability(const Lee& e, int xi_draws,
                                               unsigned seed);

struct InduceSettings {
  bool force = false;  // skip the structural-solvability precondition
  SolvabilitySettings solvability;
  SolveSettings implicit_solver;

  InduceSettings() {
    implicit_solver.n_starts = 16;
  }
};

// Induced SCM: h_i inverts the atom's own equation. Affine residuals with
// constant nonzero coefficient yield closed forms; everything else is
// captured implicitly. pa(i) = pa_E(i) \ {i}. Throws ModelError naming the
// failing atom and a witnessing clamp unless `force` is set.
Scm induce_scm(const Lee& e, const InduceSettings& s = {});

// Replace h_i by the constant clamp value with empty parent set.
Scm intervene_scm(const Scm& m, const InterventionSpec& s);

// Acyclic graphs solve by substitution in topological order; cyclic ones
// solve the fixed-point residual X - h(X) = 0 with the same multi-start
// Newton as solve_lee.
SolveReport solve_scm(const Scm& m, const SolveSettings& s = {});
SolveReport solve_scm(const Scm& m, int n_starts, unsigned seed, double tol);

bool scm_structurally_equal(const Scm& a, const Scm& b,
                            std::vector<std::string>* diffs);

struct Lemma1Settings {
  InduceSettings induce;
  SolveSettings solve;
  double functional_tol = 1e-8;
  int grid_points = 20;
  unsigned seed = 7;
};

struct Lemma1Report {
  bool structural_equal = false;
  std::vector<std::string> differences;
  double functional_max_dev = 0.0;
  int grid_points = 0;
  bool solutions_match = false;
  double max_solution_dev = 0.0;
  bool pass = false;
  std::vector<std::string> notes;
};

// intervene(induce(E)) versus induce(intervene(E)): structural equality,
// functional equality of the h sets on a seeded grid of parent values, and
// agreement of the SCM solutions with the intervened-LEE solutions.
Lemma1Report check_lemma1(const Lee& e, const InterventionSpec& s,
                          const Lemma1Settings& settings = {});

// Canonical embedding back into equilibrium equations: 0 = h_i(X_pa) - X_i.
// Defined for closed-form SCMs; implicit functions have no expression form.
Lee lee_of_scm(const Scm& m);

// Member variables whose structural-function component is identically
// constant (e.g. momenta at equilibrium). Reports may project them away,
// never silently.
std::vector<std::string> constant_components(const Scm& m);

}  // namespace eqc
