#include "eqc/pipeline.hpp"

#include <cmath>

#include "eqc/errors.hpp"
#include "eqc/parser.hpp"

namespace eqc {

std::string lotka_volterra_source(double theta11, double theta12,
                                  double theta21, double theta22, double a,
                                  double b) {
  if (!(theta11 > 0 && theta12 > 0 && theta21 > 0 && theta22 > 0))
    throw ModelError("lotka_volterra requires all theta parameters > 0");
  if (!(a >= 0 && b >= 0))
    throw ModelError("lotka_volterra requires nonnegative initial abundances");
  std::string out = "model lotka_volterra\n";
  out += "param theta11 = " + format_double(theta11) + "\n";
  out += "param theta12 = " + format_double(theta12) + "\n";
  out += "param theta21 = " + format_double(theta21) + "\n";
  out += "param theta22 = " + format_double(theta22) + "\n";
  out += "var X1 in [0, inf] init " + format_double(a) + "\n";
  out += "var X2 in [0, inf] init " + format_double(b) + "\n";
  out += "ddt X1 = X1*(theta11 - theta12*X2)\n";
  out += "ddt X2 = -X2*(theta22 - theta21*X1)\n";
  return out;
}

Model lotka_volterra_model(double theta11, double theta12, double theta21,
                           double theta22, double a, double b) {
  return parse_model(
      lotka_volterra_source(theta11, theta12, theta21, theta22, a, b));
}

std::string mass_spring_source(int D, const std::vector<double>& k,
                               const std::vector<double>& l,
                               const std::vector<double>& b,
                               const std::vector<double>& m, double L) {
  if (D < 1) throw ModelError("mass_spring requires D >= 1");
  if (k.size() != static_cast<size_t>(D + 1) ||
      l.size() != static_cast<size_t>(D + 1))
    throw ModelError("mass_spring requires D+1 spring constants and lengths");
  if (b.size() != static_cast<size_t>(D) || m.size() != static_cast<size_t>(D))
    throw ModelError("mass_spring requires D frictions and masses");
  for (double v : k)
    if (!(v > 0)) throw ModelError("mass_spring requires k > 0");
  for (double v : m)
    if (!(v > 0)) throw ModelError("mass_spring requires m > 0");
  for (double v : b)
    if (!(v > 0)) throw ModelError("mass_spring requires b > 0");

  auto idx = [](const std::string& base, int i) {
    return base + std::to_string(i);
  };

  std::string out = "model mass_spring_d" + std::to_string(D) + "\n";
  for (int i = 0; i <= D; ++i)
    out += "param " + idx("k", i) + " = " + format_double(k[i]) + "\n";
  for (int i = 0; i <= D; ++i)
    out += "param " + idx("l", i) + " = " + format_double(l[i]) + "\n";
  for (int i = 1; i <= D; ++i)
    out += "param " + idx("b", i) + " = " + format_double(b[i - 1]) + "\n";
  for (int i = 1; i <= D; ++i)
    out += "param " + idx("m", i) + " = " + format_double(m[i - 1]) + "\n";
  out += "param L = " + format_double(L) + "\n";

  for (int i = 1; i <= D; ++i) {
    double q0 = static_cast<double>(i) * L / (D + 1);
    out += "var " + idx("Q", i) + " in [-inf, inf] init " + format_double(q0) +
           "\n";
    out += "var " + idx("P", i) + " in [-inf, inf] init 0\n";
  }
  for (int i = 1; i <= D; ++i)
    out += "group " + idx("X", i) + " = (" + idx("Q", i) + ", " + idx("P", i) +
           ")\n";

  for (int i = 1; i <= D; ++i) {
    out += "ddt " + idx("Q", i) + " = " + idx("P", i) + "/" + idx("m", i) + "\n";
    // walls: Q_0 = 0 and Q_{D+1} = L
    std::string right = i == D ? "L" : idx("Q", i + 1);
    std::string pull = idx("k", i) + "*(" + right + " - " + idx("Q", i) +
                       " - " + idx("l", i) + ")";
    std::string push;
    if (i == 1)
      push = idx("k", 0) + "*(" + idx("Q", 1) + " - " + idx("l", 0) + ")";
    else
      push = idx("k", i - 1) + "*(" + idx("Q", i) + " - " + idx("Q", i - 1) +
             " - " + idx("l", i - 1) + ")";
    out += "ddt " + idx("P", i) + " = " + pull + " - " + push + " - (" +
           idx("b", i) + "/" + idx("m", i) + ")*" + idx("P", i) + "\n";
  }
  return out;
}

Model mass_spring_model(int D, const std::vector<double>& k,
                        const std::vector<double>& l,
                        const std::vector<double>& b,
                        const std::vector<double>& m, double L) {
  return parse_model(mass_spring_source(D, k, l, b, m, L));
}

DiagramReport verify_diagram(const Model& m, const InterventionSpec& s,
                             const DiagramSettings& settings) {
  if (s.mode != InterventionSpec::Mode::hard)
    throw ModelError("verify_diagram requires a hard InterventionSpec");

  DiagramReport rep;
  rep.model_name = m.name();
  rep.intervention = s.describe();
  rep.caveat =
      "stability and solvability premises are verified by seeded sampling; "
      "pass certifies the conclusion relative to the sampled premises";

  Lee lee = derive_lee(m);
  rep.lee_graph_matches_model = graph_of(lee) == graph_of(m);

  rep.theorem1 = check_theorem1(m, s, settings.theorem1);

  Lee intervened_lee = s.empty() ? lee : intervene_lee(lee, s);
  rep.solvability_observational =
      check_structural_solvability(lee, settings.lemma1.induce.solvability);
  rep.solvability_intervened = check_structural_solvability(
      intervened_lee, settings.lemma1.induce.solvability);

  bool solvable =
      rep.solvability_observational.ok && rep.solvability_intervened.ok;
  if (solvable) {
    rep.lemma1_checked = true;
    rep.lemma1 = check_lemma1(lee, s, settings.lemma1);
  } else {
    rep.notes.push_back(
        "LEE->SCM edge failed: system is not structurally solvable");
  }

  // end of the pipeline: intervened dynamics against the induced SCM
  if (solvable) {
    Model intervened_model = s.empty() ? m : apply_hard_intervention(m, s);
    Trajectory traj = integrate(intervened_model, settings.integrate);
    EquilibriumReport eq =
        detect_equilibrium(traj, intervened_model, settings.integrate.tol);
    if (eq.verdict == Verdict::converged) {
      rep.theorem2_checked = true;
      try {
        Scm end_scm = induce_scm(intervened_lee, settings.lemma1.induce);
        SolveReport solved = solve_scm(end_scm, settings.solve);
        const Solution* nearest = solved.nearest(*eq.point);
        if (!nearest) {
          rep.theorem2_dev = std::numeric_limits<double>::infinity();
          rep.notes.push_back("induced SCM has no solution");
        } else {
          double d = 0.0;
          for (size_t i = 0; i < eq.point->size(); ++i)
            d = std::max(d, std::fabs((*eq.point)[i] - nearest->x[i]));
          rep.theorem2_dev = d;
        }
      } catch (const ModelError& err) {
        rep.theorem2_dev = std::numeric_limits<double>::infinity();
        rep.notes.push_back(err.what());
      }
    } else {
      rep.notes.push_back(std::string("intervened dynamics: ") +
                          verdict_name(eq.verdict) +
                          "; equilibrium comparison skipped");
    }
  }

  rep.pass = rep.lee_graph_matches_model && rep.theorem1.pass && solvable &&
             (!rep.lemma1_checked || rep.lemma1.pass) &&
             (!rep.theorem2_checked || rep.theorem2_dev <= settings.dynamics_tol);
  return rep;
}

}  // namespace eqc
