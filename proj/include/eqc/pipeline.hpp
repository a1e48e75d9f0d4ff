#pragma once

#include <string>
#include <vector>

#include "eqc/scm.hpp"

namespace eqc {

// Predator-prey system over [0, inf)^2 with interior equilibrium
// (theta22/theta21, theta11/theta12). All rate parameters must be positive
// and the initial abundances nonnegative.
std::string lotka_volterra_source(double theta11, double theta12,
                                  double theta21, double theta22, double a,
                                  double b);
Model lotka_volterra_model(double theta11, double theta12, double theta21,
                           double theta22, double a, double b);

// Chain of D masses joined by D+1 springs between fixed walls at 0 and L,
// with friction. Variables are positions and momenta grouped into pairs
// X_i = (Q_i, P_i); k and l have D+1 entries (spring 0 touches the left
// wall), b and m have D entries.
std::string mass_spring_source(int D, const std::vector<double>& k,
                               const std::vector<double>& l,
                               const std::vector<double>& b,
                               const std::vector<double>& m, double L);
Model mass_spring_model(int D, const std::vector<double>& k,
                        const std::vector<double>& l,
                        const std::vector<double>& b,
                        const std::vector<double>& m, double L);

struct DiagramSettings {
  Theorem1Settings theorem1;
  Lemma1Settings lemma1;
  SolveSettings solve;
  IntegrateSettings integrate;
  double dynamics_tol = 1e-5;  // integration error dominates here
};

// One report per intervention, mirroring the edges of the derivation
// square: ODE -> LEE -> SCM horizontally, intervention vertically.
struct DiagramReport {
  std::string model_name;
  std::string intervention;

  bool lee_graph_matches_model = false;
  Theorem1Report theorem1;
  SolvabilityReport solvability_observational;
  SolvabilityReport solvability_intervened;
  bool lemma1_checked = false;
  Lemma1Report lemma1;
  bool theorem2_checked = false;  // intervened ODE converged
  double theorem2_dev = 0.0;
  bool pass = false;
  std::string caveat;
  std::vector<std::string> notes;
};

// Runs the whole square for one hard intervention: derive both ways and
// compare (intervene/derive commutation), check structural solvability of
// both equation systems, compare the induced SCMs, and finally check that
// the intervened dynamics settles onto the solution of the end-of-pipeline
// SCM. Solvability failures surface as a failed edge, not an exception.
DiagramReport verify_diagram(const Model& m, const InterventionSpec& s,
                             const DiagramSettings& settings = {});

}  // namespace eqc
