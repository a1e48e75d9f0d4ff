#include "eqc/lee.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eqc/errors.hpp"
#include "newton.hpp"

namespace eqc {

std::vector<std::string> Lee::labels() const {
  std::vector<std::string> out;
  for (const Atom& a : sys_.atoms()) out.push_back(a.name);
  return out;
}

std::vector<ExprPtr> Lee::equation(const std::string& label) const {
  int ai = sys_.atom_index(label);
  if (ai < 0) throw ModelError("unknown label: " + label);
  std::vector<ExprPtr> out;
  for (int slot : sys_.atoms()[ai].members) out.push_back(sys_.rhs(slot));
  return out;
}

std::map<std::string, std::set<std::string>> Lee::parents() const {
  return structural_parents(sys_);
}

std::vector<double> Lee::residual(std::span<const double> x) const {
  std::vector<double> out(sys_.n_vars());
  std::vector<double> scratch(static_cast<size_t>(sys_.scratch_size()));
  sys_.eval_rhs(x, out, scratch);
  return out;
}

double Lee::residual_inf(std::span<const double> x) const {
  double m = 0.0;
  for (double v : residual(x)) m = std::max(m, std::fabs(v));
  return m;
}

Lee derive_lee(const Model& m) { return Lee(m); }

Lee intervene_lee(const Lee& e, const InterventionSpec& s) {
  if (s.mode != InterventionSpec::Mode::hard)
    throw ModelError("intervene_lee requires a hard InterventionSpec");
  const Model& sys = e.system();
  std::map<std::string, ExprPtr> new_rhs;
  for (const std::string& t : s.targets) {
    int ai = sys.atom_index(t);
    if (ai < 0) throw ModelError("unknown label: " + t);
    for (int slot : sys.atoms()[ai].members) {
      const std::string& v = sys.vars()[slot].name;
      auto it = s.values.find(v);
      if (it == s.values.end())
        throw ModelError("intervention on " + t + " missing value for member " +
                         v);
      // canonical clamp residual X_i - xi_i
      new_rhs[v] = Expr::binary(BinOp::sub, Expr::var(v),
                                Expr::number(it->second));
    }
  }
  return Lee(sys.with_rhs(std::move(new_rhs), {}));
}

CausalGraph graph_of(const Lee& e) { return graph_of(e.system()); }

const char* solve_verdict_name(SolveVerdict v) {
  switch (v) {
    case SolveVerdict::unique: return "unique";
    case SolveVerdict::multiple: return "multiple";
    case SolveVerdict::none_found: return "none-found";
  }
  return "?";
}

const Solution* SolveReport::nearest(const std::vector<double>& x) const {
  const Solution* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Solution& sol : solutions) {
    double d = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
      d = std::max(d, std::fabs(x[i] - sol.x[i]));
    if (d < best_d) {
      best_d = d;
      best = &sol;
    }
  }
  return best;
}

SolveReport solve_lee(const Lee& e, const SolveSettings& s) {
  if (s.n_starts < 1) throw ModelError("solve_lee needs n_starts >= 1");
  const Model& sys = e.system();
  const int n = sys.n_vars();

  // variables that occur in no equation make the system degenerate: their
  // value is undetermined and every start yields its own "solution"
  std::set<std::string> used;
  for (int i = 0; i < n; ++i)
    for (const std::string& v : free_vars(sys.rhs(i))) used.insert(v);
  std::vector<std::string> unused;
  for (const VarDecl& v : sys.vars())
    if (!used.count(v.name)) unused.push_back(v.name);

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> f(n);
  std::vector<double> scratch(static_cast<size_t>(sys.scratch_size()));
  detail::ResidualFn residual = [&](const std::vector<double>& p,
                                    Eigen::VectorXd& F) {
    try {
      sys.eval_rhs(p, f, scratch);
    } catch (const EvalError&) {
      return false;
    }
    for (int i = 0; i < n; ++i) F[i] = f[i];
    return F.allFinite();
  };

  SolveReport rep;
  rep.starts = s.n_starts;
  const double radius = 10.0 * s.tol;
  const double domain_slack = 10.0 * s.tol;

  detail::SolutionClusters clusters;
  int singular_everywhere = 0;

  for (int k = 0; k < s.n_starts; ++k) {
    std::vector<double> x0(n);
    for (int i = 0; i < n; ++i) {
      const VarDecl& v = sys.vars()[i];
      double lo = std::max(v.lo, v.init - s.box_halfwidth);
      double hi = std::min(v.hi, v.init + s.box_halfwidth);
      x0[i] = lo + (hi - lo) * unit(rng);
    }
    detail::NewtonOutcome res = detail::newton_solve(residual, std::move(x0), s);
    if (res.singular_everywhere) ++singular_everywhere;
    if (!res.converged) continue;
    ++rep.converged_starts;
    if (!sys.in_domain(res.x, domain_slack)) {
      ++rep.out_of_domain;
      continue;
    }
    clusters.add(res.x, res.residual_inf, radius);
  }

  rep.solutions = std::move(clusters.clusters);

  if (!unused.empty()) {
    std::string msg = "degenerate: no equation constrains";
    for (const std::string& v : unused) msg += " " + v;
    rep.notes.push_back(msg);
  }
  if (rep.converged_starts == 0 && singular_everywhere == s.n_starts)
    rep.notes.push_back("jacobian singular at every iterate of every start");
  if (rep.out_of_domain > 0)
    rep.notes.push_back("solutions outside declared domains were dropped");

  if (rep.solutions.empty()) {
    rep.verdict = SolveVerdict::none_found;
  } else if (rep.solutions.size() > 1) {
    rep.verdict = SolveVerdict::multiple;
  } else if (2 * rep.solutions.front().support >= s.n_starts) {
    rep.verdict = SolveVerdict::unique;
  } else {
    rep.verdict = SolveVerdict::none_found;
    rep.notes.push_back("single cluster with weak support");
  }
  return rep;
}

SolveReport solve_lee(const Lee& e, int n_starts, unsigned seed, double tol) {
  SolveSettings s;
  s.n_starts = n_starts;
  s.seed = seed;
  s.tol = tol;
  return solve_lee(e, s);
}

bool lee_equal(const Lee& a, const Lee& b, std::vector<std::string>* diffs) {
  bool equal = true;
  auto note = [&](const std::string& msg) {
    equal = false;
    if (diffs) diffs->push_back(msg);
  };

  if (a.labels() != b.labels()) {
    note("label sets differ");
    return false;
  }
  auto pa = a.parents(), pb = b.parents();
  for (const std::string& label : a.labels()) {
    if (pa[label] != pb[label]) note("parent set differs for label " + label);
    auto ea = a.equation(label), eb = b.equation(label);
    if (ea.size() != eb.size()) {
      note("equation arity differs for label " + label);
      continue;
    }
    for (size_t i = 0; i < ea.size(); ++i)
      if (!expr_equal(ea[i], eb[i]))
        note("equation differs for label " + label + ": " + to_text(ea[i]) +
             " vs " + to_text(eb[i]));
  }
  return equal;
}

namespace {

// derive_lee over an intervened ODE yields the residual 0 for clamped
// variables; rewrite those to the canonical clamp X - xi (xi is the
// intervened initial condition) so both paths become comparable
Lee canonicalize_clamps(const Lee& e, const InterventionSpec& s) {
  const Model& sys = e.system();
  std::map<std::string, ExprPtr> new_rhs;
  for (const std::string& t : s.targets) {
    int ai = sys.atom_index(t);
    if (ai < 0) throw ModelError("unknown label: " + t);
    for (int slot : sys.atoms()[ai].members) {
      if (!sys.rhs_is_zero(slot)) continue;
      const VarDecl& v = sys.vars()[slot];
      new_rhs[v.name] = Expr::binary(BinOp::sub, Expr::var(v.name),
                                     Expr::number(v.init));
    }
  }
  if (new_rhs.empty()) return e;
  return Lee(sys.with_rhs(std::move(new_rhs), {}));
}

}  // namespace

Theorem1Report check_theorem1(const Model& m, const InterventionSpec& s,
                              const Theorem1Settings& settings) {
  if (s.mode != InterventionSpec::Mode::hard)
    throw ModelError("check_theorem1 requires a hard InterventionSpec");

  Theorem1Report rep;

  Lee intervene_then = s.empty() ? derive_lee(m)
                                 : intervene_lee(derive_lee(m), s);
  Model intervened_model = s.empty() ? m : apply_hard_intervention(m, s);
  Lee derive_then = canonicalize_clamps(derive_lee(intervened_model), s);

  rep.structural_equal = lee_equal(intervene_then, derive_then,
                                   &rep.differences);

  Trajectory traj = integrate(intervened_model, settings.integrate);
  EquilibriumReport eq =
      detect_equilibrium(traj, intervened_model, settings.integrate.tol);
  if (eq.verdict == Verdict::converged) {
    rep.solution_checked = true;
    SolveReport solved = solve_lee(intervene_then, settings.solve);
    const Solution* nearest = solved.nearest(*eq.point);
    if (!nearest) {
      rep.max_solution_dev = std::numeric_limits<double>::infinity();
      rep.differences.push_back(
          "intervened LEE has no solution near the ODE equilibrium");
    } else {
      double d = 0.0;
      for (size_t i = 0; i < eq.point->size(); ++i)
        d = std::max(d, std::fabs((*eq.point)[i] - nearest->x[i]));
      rep.max_solution_dev = d;
    }
  }

  rep.pass = rep.structural_equal &&
             (!rep.solution_checked ||
              rep.max_solution_dev <= settings.solution_tol);
  return rep;
}

}  // namespace eqc
