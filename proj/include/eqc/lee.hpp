#pragma once

#include <string>
#include <vector>

#include "eqc/graph.hpp"
#include "eqc/integrate.hpp"
#include "eqc/intervention.hpp"
#include "eqc/model.hpp"

namespace eqc {

// Labeled equilibrium equations: one equation 0 = g_i per atom i, with the
// label identifying which equation an intervention replaces. Stored as a
// residual system over the same variable space as the source model; the
// label set is the atom list, and the equation of atom i holds one scalar
// residual per member variable.
class Lee {
 public:
  explicit Lee(Model residual_system) : sys_(std::move(residual_system)) {}

  const Model& system() const { return sys_; }
  const std::vector<Atom>& atoms() const { return sys_.atoms(); }

  std::vector<std::string> labels() const;
  // residuals of the equation labeled by this atom, one per member
  std::vector<ExprPtr> equation(const std::string& label) const;
  std::map<std::string, std::set<std::string>> parents() const;

  std::vector<double> residual(std::span<const double> x) const;
  double residual_inf(std::span<const double> x) const;

 private:
  Model sys_;
};

// Equilibrium equations of an ODE: residual of label i is f_i verbatim,
// parent sets and graph carry over unchanged.
Lee derive_lee(const Model& m);

// Perfect intervention at the equation level: the equation labeled i
// becomes the canonical clamp residual X_i - xi_i (componentwise for
// grouped atoms) with parent set {i}; all other equations are untouched.
Lee intervene_lee(const Lee& e, const InterventionSpec& s);

CausalGraph graph_of(const Lee& e);

enum class SolveVerdict { unique, multiple, none_found };
const char* solve_verdict_name(SolveVerdict v);

struct Solution {
  std::vector<double> x;
  double residual = 0.0;
  int support = 0;  // number of starts that landed in this cluster
};

struct SolveSettings {
  int n_starts = 32;
  unsigned seed = 1;
  double tol = 1e-8;
  double box_halfwidth = 5.0;  // start box [init-hw, init+hw] ∩ domain
  int max_iter = 100;
  int max_backtracks = 30;
};

struct SolveReport {
  std::vector<Solution> solutions;  // clustered, inside declared domains
  int starts = 0;
  int converged_starts = 0;
  int out_of_domain = 0;
  SolveVerdict verdict = SolveVerdict::none_found;
  std::vector<std::string> notes;

  // distance helpers used by the comparison layers
  const Solution* nearest(const std::vector<double>& x) const;
};

// Damped multi-start Newton with finite-difference Jacobians. Converged
// final points are clustered with radius 10*tol; the verdict is unique
// only when a single cluster absorbs at least half of the starts.
SolveReport solve_lee(const Lee& e, const SolveSettings& s = {});
SolveReport solve_lee(const Lee& e, int n_starts, unsigned seed, double tol);

// Structural equality of label sets, parent sets and residual expressions.
bool lee_equal(const Lee& a, const Lee& b, std::vector<std::string>* diffs);

struct Theorem1Settings {
  SolveSettings solve;
  IntegrateSettings integrate;
  double solution_tol = 1e-5;
};

struct Theorem1Report {
  bool structural_equal = false;
  std::vector<std::string> differences;
  bool solution_checked = false;   // intervened ODE converged
  double max_solution_dev = 0.0;   // |LEE solution - ODE equilibrium|_inf
  bool pass = false;
};

// Intervene-then-derive versus derive-then-intervene. The derived side
// represents a clamped variable as the residual 0 (its RHS is the literal
// zero); comparison canonicalizes those equations to X_i - xi_i, with xi
// read off the intervened initial condition. When the intervened ODE
// converges, the equilibrium must match a solution of the intervened LEE.
Theorem1Report check_theorem1(const Model& m, const InterventionSpec& s,
                              const Theorem1Settings& settings = {});

// JSON serialization lives in serialize.hpp.

}  // namespace eqc
