#include "eqc/scm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eqc/errors.hpp"
#include "newton.hpp"

namespace eqc {

namespace {

std::set<std::string> member_names(const Model& sys, const Atom& a) {
  std::set<std::string> out;
  for (int slot : a.members) out.insert(sys.vars()[slot].name);
  return out;
}

std::map<std::string, ExprPtr> zero_substitution(const Model& sys,
                                                 const Atom& a) {
  std::map<std::string, ExprPtr> sub;
  for (int slot : a.members) sub[sys.vars()[slot].name] = Expr::number(0.0);
  return sub;
}

ExprPtr scaled(double c, const ExprPtr& e) {
  if (c == 1.0) return e;
  if (c == -1.0) return Expr::unary(UnOp::neg, e);
  return Expr::binary(BinOp::mul, Expr::number(c), e);
}

ExprPtr fold_or_keep(const ExprPtr& e,
                     const std::map<std::string, double>& params) {
  if (auto v = fold_constant(e, params)) return Expr::number(*v);
  return e;
}

// coefficient matrix of the atom's residuals in its own members; entries
// are expressions free of the members, or nullptr when a residual is not
// affine in them
struct AffineEquation {
  bool affine = true;
  std::vector<std::vector<ExprPtr>> coeff;  // [component][member] may be null
};

AffineEquation decompose_atom(const Model& sys, const Atom& a) {
  AffineEquation out;
  std::set<std::string> targets = member_names(sys, a);
  const size_t d = a.members.size();
  for (int slot : a.members) {
    auto coeffs = affine_decompose(sys.rhs(slot), targets);
    if (!coeffs) {
      out.affine = false;
      return out;
    }
    std::vector<ExprPtr> row(d);
    for (size_t j = 0; j < d; ++j) {
      const std::string& mv = sys.vars()[a.members[j]].name;
      auto it = coeffs->find(mv);
      if (it != coeffs->end()) row[j] = it->second;
    }
    out.coeff.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Scm::Scm(Lee source, std::vector<StructuralFn> fns)
    : source_(std::move(source)), fns_(std::move(fns)) {
  const Model& sys = source_.system();
  if (fns_.size() != sys.atoms().size())
    throw ModelError("SCM needs exactly one structural function per atom");
  for (size_t i = 0; i < fns_.size(); ++i) {
    const StructuralFn& f = fns_[i];
    const Atom& a = sys.atoms()[i];
    if (f.atom != a.name)
      throw ModelError("structural function order must match atom order");
    if (f.parents.count(f.atom))
      throw ModelError("structural function for " + f.atom +
                       " lists itself as parent");
    for (const std::string& p : f.parents)
      if (sys.atom_index(p) < 0)
        throw ModelError("unknown parent atom: " + p);
    size_t arity =
        f.kind == StructuralFn::Kind::closed ? f.closed.size() : f.residual.size();
    if (arity != a.members.size())
      throw ModelError("structural function arity mismatch for " + f.atom);

    const auto& exprs =
        f.kind == StructuralFn::Kind::closed ? f.closed : f.residual;
    std::vector<CompiledExpr> compiled;
    for (const ExprPtr& e : exprs) {
      compiled.emplace_back(e, sys.var_slots(), sys.param_map());
      scratch_size_ = std::max(scratch_size_, compiled.back().stack_depth());
    }
    compiled_.push_back(std::move(compiled));
  }
}

const StructuralFn& Scm::fn(const std::string& atom) const {
  int ai = space().atom_index(atom);
  if (ai < 0) throw ModelError("unknown atom: " + atom);
  return fns_[static_cast<size_t>(ai)];
}

std::vector<double> Scm::eval_fn(int atom_index,
                                 std::span<const double> state) const {
  const Model& sys = space();
  const Atom& a = sys.atoms()[static_cast<size_t>(atom_index)];
  const StructuralFn& f = fns_[static_cast<size_t>(atom_index)];
  const std::vector<CompiledExpr>& compiled =
      compiled_[static_cast<size_t>(atom_index)];
  std::vector<double> scratch(static_cast<size_t>(scratch_size_));

  if (f.kind == StructuralFn::Kind::closed) {
    std::vector<double> out;
    out.reserve(compiled.size());
    for (const CompiledExpr& ce : compiled)
      out.push_back(ce.eval(state, scratch.data()));
    return out;
  }

  // implicit: solve the captured equation for the members at these parent
  // values; the solution must be unique across the multi-start
  const size_t d = a.members.size();
  const std::vector<CompiledExpr>& residual = compiled;
  std::vector<double> full(state.begin(), state.end());

  detail::ResidualFn fn = [&](const std::vector<double>& y,
                              Eigen::VectorXd& F) {
    for (size_t j = 0; j < d; ++j) full[static_cast<size_t>(a.members[j])] = y[j];
    try {
      for (size_t kk = 0; kk < d; ++kk)
        F[static_cast<Eigen::Index>(kk)] = residual[kk].eval(full, scratch.data());
    } catch (const EvalError&) {
      return false;
    }
    return F.allFinite();
  };

  std::mt19937_64 rng(f.solver.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  detail::SolutionClusters clusters;
  const double radius = 10.0 * f.solver.tol;
  for (int k = 0; k < f.solver.n_starts; ++k) {
    std::vector<double> y0(d);
    for (size_t j = 0; j < d; ++j) {
      const VarDecl& v = sys.vars()[static_cast<size_t>(a.members[j])];
      double lo = std::max(v.lo, v.init - f.solver.box_halfwidth);
      double hi = std::min(v.hi, v.init + f.solver.box_halfwidth);
      y0[j] = lo + (hi - lo) * unit(rng);
    }
    auto res = detail::newton_solve(fn, std::move(y0), f.solver);
    if (res.converged) clusters.add(res.x, res.residual_inf, radius);
  }
  if (clusters.clusters.empty())
    throw EvalError("implicit structural function for " + f.atom +
                    ": no solution at the given parent values");
  if (clusters.clusters.size() > 1)
    throw EvalError("implicit structural function for " + f.atom +
                    ": multiple solutions at the given parent values");
  return clusters.clusters.front().x;
}

CausalGraph Scm::graph() const {
  const Model& sys = space();
  CausalGraph g;
  for (const Atom& a : sys.atoms()) g.nodes.push_back(a.name);
  g.self_loop.assign(g.nodes.size(), false);  // never set, by construction
  for (size_t i = 0; i < fns_.size(); ++i)
    for (const std::string& p : fns_[i].parents)
      g.edges.insert({sys.atom_index(p), static_cast<int>(i)});
  return g;
}

bool Scm::acyclic() const { return topo_order().has_value(); }

std::optional<std::vector<int>> Scm::topo_order() const {
  const int n = static_cast<int>(fns_.size());
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> children(n);
  CausalGraph g = graph();
  for (auto [from, to] : g.edges) {
    ++indegree[to];
    children[from].push_back(to);
  }
  std::vector<int> order;
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (int c : children[v])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

const AtomSolvability* SolvabilityReport::first_failure() const {
  for (const AtomSolvability& a : atoms)
    if (!a.ok) return &a;
  return nullptr;
}

namespace {

std::vector<double> draw_state(const Model& sys, std::mt19937_64& rng,
                               double halfwidth) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(sys.n_vars());
  for (int i = 0; i < sys.n_vars(); ++i) {
    const VarDecl& v = sys.vars()[i];
    double lo = std::max(v.lo, v.init - halfwidth);
    double hi = std::min(v.hi, v.init + halfwidth);
    x[i] = lo + (hi - lo) * unit(rng);
  }
  return x;
}

std::map<std::string, double> clamp_witness(const Model& sys, const Atom& self,
                                            const std::vector<double>& state) {
  std::map<std::string, double> out;
  std::set<int> own(self.members.begin(), self.members.end());
  for (int i = 0; i < sys.n_vars(); ++i)
    if (!own.count(i)) out[sys.vars()[i].name] = state[i];
  return out;
}

// determinant of the member-coefficient matrix at a state
double coeff_det(const std::vector<std::vector<CompiledExpr>>& coeff,
                 const std::vector<double>& state, std::vector<double>& scratch) {
  const int d = static_cast<int>(coeff.size());
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      A(i, j) = coeff[i][j].eval(state, scratch.data());
  if (d == 1) return A(0, 0);
  return A.determinant();
}

InterventionSpec clamp_others(const Model& sys, const Atom& self,
                              const std::vector<double>& state) {
  InterventionSpec spec;
  spec.mode = InterventionSpec::Mode::hard;
  std::set<int> own(self.members.begin(), self.members.end());
  for (const Atom& a : sys.atoms()) {
    if (a.name == self.name) continue;
    spec.targets.push_back(a.name);
    for (int slot : a.members) spec.values[sys.vars()[slot].name] = state[slot];
  }
  return spec;
}

}  // namespace

SolvabilityReport check_structural_solvability(const Lee& e,
                                               const SolvabilitySettings& s) {
  const Model& sys = e.system();
  SolvabilityReport rep;
  rep.ok = true;
  std::mt19937_64 rng(s.seed);

  for (const Atom& a : sys.atoms()) {
    AtomSolvability verdict;
    verdict.atom = a.name;

    AffineEquation af = decompose_atom(sys, a);
    if (af.affine) {
      const size_t d = a.members.size();
      // constant coefficients decide the atom exactly
      bool constant = true;
      Eigen::MatrixXd A(d, d);
      for (size_t i = 0; i < d && constant; ++i) {
        for (size_t j = 0; j < d; ++j) {
          if (!af.coeff[i][j]) {
            A(i, j) = 0.0;
            continue;
          }
          auto v = fold_constant(af.coeff[i][j], sys.param_map());
          if (!v) {
            constant = false;
            break;
          }
          A(i, j) = *v;
        }
      }
      if (constant) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        verdict.method = "exact-affine";
        verdict.ok = lu.isInvertible();
        if (!verdict.ok) {
          verdict.note = "member coefficient matrix is singular";
          verdict.witness = clamp_witness(sys, a, sys.initial_state());
        }
        rep.atoms.push_back(std::move(verdict));
        rep.ok = rep.ok && rep.atoms.back().ok;
        continue;
      }

      // coefficients depend on the parents: scan the clamp box for a
      // vanishing determinant; a sign change pins a witness by bisection
      verdict.method = "sampled-coefficient";
      std::vector<std::vector<CompiledExpr>> coeff(d);
      int scratch_size = 1;
      for (size_t i = 0; i < d; ++i) {
        for (size_t j = 0; j < d; ++j) {
          ExprPtr c = af.coeff[i][j] ? af.coeff[i][j] : Expr::number(0.0);
          coeff[i].emplace_back(c, sys.var_slots(), sys.param_map());
          scratch_size =
              std::max(scratch_size, coeff[i].back().stack_depth());
        }
      }
      std::vector<double> scratch(static_cast<size_t>(scratch_size));

      std::vector<std::vector<double>> probes;
      std::vector<double> lo_corner(sys.n_vars()), hi_corner(sys.n_vars());
      for (int i = 0; i < sys.n_vars(); ++i) {
        const VarDecl& v = sys.vars()[i];
        lo_corner[i] = std::max(v.lo, v.init - s.box_halfwidth);
        hi_corner[i] = std::min(v.hi, v.init + s.box_halfwidth);
      }
      probes.push_back(lo_corner);
      probes.push_back(hi_corner);
      for (int k = 0; k < std::max(s.xi_draws, 4); ++k)
        probes.push_back(draw_state(sys, rng, s.box_halfwidth));

      bool failed = false;
      std::vector<double> dets;
      for (const auto& p : probes) {
        double det;
        try {
          det = coeff_det(coeff, p, scratch);
        } catch (const EvalError&) {
          det = std::numeric_limits<double>::quiet_NaN();
        }
        dets.push_back(det);
        if (std::isfinite(det) && std::fabs(det) <= 1e-9) {
          verdict.ok = false;
          verdict.note = "member coefficient vanishes";
          verdict.witness = clamp_witness(sys, a, p);
          failed = true;
          break;
        }
      }
      if (!failed) {
        for (size_t i = 0; i < probes.size() && !failed; ++i) {
          for (size_t j = i + 1; j < probes.size() && !failed; ++j) {
            if (!std::isfinite(dets[i]) || !std::isfinite(dets[j])) continue;
            if ((dets[i] > 0) == (dets[j] > 0)) continue;
            // bisect along the segment between the two probes
            std::vector<double> lo = probes[i], hi = probes[j];
            double flo = dets[i];
            std::vector<double> mid(lo.size());
            for (int it = 0; it < 60; ++it) {
              for (size_t v = 0; v < lo.size(); ++v)
                mid[v] = 0.5 * (lo[v] + hi[v]);
              double fm = coeff_det(coeff, mid, scratch);
              if ((fm > 0) == (flo > 0)) {
                lo = mid;
                flo = fm;
              } else {
                hi = mid;
              }
            }
            verdict.ok = false;
            verdict.note = "member coefficient changes sign";
            verdict.witness = clamp_witness(sys, a, mid);
            failed = true;
          }
        }
      }
      if (!failed) {
        verdict.ok = true;
        verdict.note = "coefficient nonvanishing on sampled clamps";
      }
      rep.atoms.push_back(std::move(verdict));
      rep.ok = rep.ok && rep.atoms.back().ok;
      continue;
    }

    // general route: clamp everything else and solve for this atom
    verdict.method = "sampled";
    verdict.ok = true;
    for (int k = 0; k < s.xi_draws; ++k) {
      std::vector<double> state = draw_state(sys, rng, s.box_halfwidth);
      InterventionSpec spec = clamp_others(sys, a, state);
      SolveReport solved = solve_lee(intervene_lee(e, spec), s.solve);
      if (solved.verdict != SolveVerdict::unique) {
        verdict.ok = false;
        verdict.note = std::string("intervened solve: ") +
                       solve_verdict_name(solved.verdict);
        verdict.witness = clamp_witness(sys, a, state);
        break;
      }
    }
    rep.atoms.push_back(std::move(verdict));
    rep.ok = rep.ok && rep.atoms.back().ok;
  }
  return rep;
}

SolvabilityReport check_structural_solvability(const Lee& e, int xi_draws,
                                               unsigned seed) {
  SolvabilitySettings s;
  s.xi_draws = xi_draws;
  s.seed = seed;
  return check_structural_solvability(e, s);
}

Scm induce_scm(const Lee& e, const InduceSettings& s) {
  if (!s.force) {
    SolvabilityReport rep = check_structural_solvability(e, s.solvability);
    if (!rep.ok) {
      const AtomSolvability* f = rep.first_failure();
      std::string msg = "not structurally solvable at atom " + f->atom;
      if (!f->note.empty()) msg += " (" + f->note + ")";
      if (!f->witness.empty()) {
        msg += "; witness clamp:";
        for (const auto& [v, x] : f->witness)
          msg += " " + v + "=" + format_double(x);
      }
      throw ModelError(msg);
    }
  }

  const Model& sys = e.system();
  auto pa = e.parents();
  std::vector<StructuralFn> fns;

  for (const Atom& a : sys.atoms()) {
    StructuralFn fn;
    fn.atom = a.name;
    fn.parents = pa[a.name];
    fn.parents.erase(a.name);
    fn.solver = s.implicit_solver;

    AffineEquation af = decompose_atom(sys, a);
    bool closed = false;
    if (af.affine) {
      const size_t d = a.members.size();
      Eigen::MatrixXd A(d, d);
      bool constant = true;
      for (size_t i = 0; i < d && constant; ++i) {
        for (size_t j = 0; j < d; ++j) {
          if (!af.coeff[i][j]) {
            A(i, j) = 0.0;
            continue;
          }
          auto v = fold_constant(af.coeff[i][j], sys.param_map());
          if (!v) {
            constant = false;
            break;
          }
          A(i, j) = *v;
        }
      }
      if (constant) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.isInvertible()) {
          // h = -A^{-1} * g|_{members=0}, assembled per component
          Eigen::MatrixXd B = -lu.inverse();
          auto zero_sub = zero_substitution(sys, a);
          std::vector<ExprPtr> rest;
          for (int slot : a.members)
            rest.push_back(
                fold_or_keep(substitute(sys.rhs(slot), zero_sub),
                             sys.param_map()));
          for (size_t kk = 0; kk < d; ++kk) {
            ExprPtr total;
            for (size_t j = 0; j < d; ++j) {
              double c = B(kk, j);
              if (c == 0.0) continue;
              if (rest[j]->kind() == Expr::Kind::constant &&
                  rest[j]->value() == 0.0)
                continue;
              ExprPtr term = scaled(c, rest[j]);
              total = total ? Expr::binary(BinOp::add, total, term) : term;
            }
            if (!total) total = Expr::number(0.0);
            fn.closed.push_back(fold_or_keep(total, sys.param_map()));
          }
          fn.kind = StructuralFn::Kind::closed;
          closed = true;
        }
      }
    }
    if (!closed) {
      fn.kind = StructuralFn::Kind::implicit;
      for (int slot : a.members) fn.residual.push_back(sys.rhs(slot));
    }
    fns.push_back(std::move(fn));
  }
  return Scm(e, std::move(fns));
}

Scm intervene_scm(const Scm& m, const InterventionSpec& s) {
  if (s.mode != InterventionSpec::Mode::hard)
    throw ModelError("intervene_scm requires a hard InterventionSpec");
  const Model& sys = m.space();
  std::vector<StructuralFn> fns = m.fns();
  for (const std::string& t : s.targets) {
    int ai = sys.atom_index(t);
    if (ai < 0) throw ModelError("unknown intervention target: " + t);
    StructuralFn& fn = fns[static_cast<size_t>(ai)];
    fn.kind = StructuralFn::Kind::closed;
    fn.parents.clear();
    fn.closed.clear();
    fn.residual.clear();
    for (int slot : sys.atoms()[ai].members) {
      const std::string& v = sys.vars()[slot].name;
      auto it = s.values.find(v);
      if (it == s.values.end())
        throw ModelError("intervention on " + t + " missing value for member " +
                         v);
      fn.closed.push_back(Expr::number(it->second));
    }
  }
  return Scm(m.source(), std::move(fns));
}

SolveReport solve_scm(const Scm& m, const SolveSettings& s) {
  if (s.n_starts < 1) throw ModelError("solve_scm needs n_starts >= 1");
  const Model& sys = m.space();
  const int n = sys.n_vars();
  const int n_atoms = static_cast<int>(sys.atoms().size());
  SolveReport rep;
  rep.starts = s.n_starts;

  auto structural_residual = [&](const std::vector<double>& x) {
    double worst = 0.0;
    for (int ai = 0; ai < n_atoms; ++ai) {
      std::vector<double> y = m.eval_fn(ai, x);
      const Atom& a = sys.atoms()[static_cast<size_t>(ai)];
      for (size_t j = 0; j < a.members.size(); ++j)
        worst = std::max(worst,
                         std::fabs(x[static_cast<size_t>(a.members[j])] - y[j]));
    }
    return worst;
  };

  if (auto topo = m.topo_order()) {
    // acyclic: one substitution pass in topological order is exact
    std::vector<double> x = sys.initial_state();
    try {
      for (int ai : *topo) {
        std::vector<double> y = m.eval_fn(ai, x);
        const Atom& a = sys.atoms()[static_cast<size_t>(ai)];
        for (size_t j = 0; j < a.members.size(); ++j)
          x[static_cast<size_t>(a.members[j])] = y[j];
      }
      double res = structural_residual(x);
      rep.solutions.push_back({x, res, s.n_starts});
      rep.converged_starts = s.n_starts;
      rep.verdict = SolveVerdict::unique;
      rep.notes.push_back("acyclic graph: solved by substitution");
    } catch (const EvalError& err) {
      rep.verdict = SolveVerdict::none_found;
      rep.notes.push_back(err.what());
    }
    return rep;
  }

  // cyclic: multi-start Newton on the fixed-point residual X - h(X)
  detail::ResidualFn residual = [&](const std::vector<double>& x,
                                    Eigen::VectorXd& F) {
    try {
      for (int ai = 0; ai < n_atoms; ++ai) {
        std::vector<double> y = m.eval_fn(ai, x);
        const Atom& a = sys.atoms()[static_cast<size_t>(ai)];
        for (size_t j = 0; j < a.members.size(); ++j) {
          int slot = a.members[j];
          F[slot] = x[static_cast<size_t>(slot)] - y[j];
        }
      }
    } catch (const EvalError&) {
      return false;
    }
    return F.allFinite();
  };

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  detail::SolutionClusters clusters;
  const double radius = 10.0 * s.tol;
  const double domain_slack = 10.0 * s.tol;

  for (int k = 0; k < s.n_starts; ++k) {
    std::vector<double> x0(n);
    for (int i = 0; i < n; ++i) {
      const VarDecl& v = sys.vars()[i];
      double lo = std::max(v.lo, v.init - s.box_halfwidth);
      double hi = std::min(v.hi, v.init + s.box_halfwidth);
      x0[i] = lo + (hi - lo) * unit(rng);
    }
    auto res = detail::newton_solve(residual, std::move(x0), s);
    if (!res.converged) continue;
    ++rep.converged_starts;
    if (!sys.in_domain(res.x, domain_slack)) {
      ++rep.out_of_domain;
      continue;
    }
    clusters.add(res.x, res.residual_inf, radius);
  }
  rep.solutions = std::move(clusters.clusters);
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

SolveReport solve_scm(const Scm& m, int n_starts, unsigned seed, double tol) {
  SolveSettings s;
  s.n_starts = n_starts;
  s.seed = seed;
  s.tol = tol;
  return solve_scm(m, s);
}

bool scm_structurally_equal(const Scm& a, const Scm& b,
                            std::vector<std::string>* diffs) {
  bool equal = true;
  auto note = [&](const std::string& msg) {
    equal = false;
    if (diffs) diffs->push_back(msg);
  };

  if (a.fns().size() != b.fns().size()) {
    note("atom counts differ");
    return false;
  }
  for (size_t i = 0; i < a.fns().size(); ++i) {
    const StructuralFn& fa = a.fns()[i];
    const StructuralFn& fb = b.fns()[i];
    if (fa.atom != fb.atom) {
      note("atom order differs");
      return false;
    }
    if (fa.parents != fb.parents)
      note("parent set differs for atom " + fa.atom);
    if (fa.kind != fb.kind) {
      note("function kind differs for atom " + fa.atom);
      continue;
    }
    if (fa.kind == StructuralFn::Kind::closed) {
      for (size_t j = 0; j < fa.closed.size(); ++j)
        if (!expr_equal(fa.closed[j], fb.closed[j]))
          note("closed form differs for atom " + fa.atom + ": " +
               to_text(fa.closed[j]) + " vs " + to_text(fb.closed[j]));
    } else {
      for (size_t j = 0; j < fa.residual.size(); ++j)
        if (!expr_equal(fa.residual[j], fb.residual[j]))
          note("captured equation differs for atom " + fa.atom);
    }
  }
  return equal;
}

namespace {

double cluster_set_distance(const std::vector<Solution>& a,
                            const std::vector<Solution>& b) {
  double worst = 0.0;
  auto one_way = [&](const std::vector<Solution>& from,
                     const std::vector<Solution>& to) {
    for (const Solution& s : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Solution& t : to) {
        double d = 0.0;
        for (size_t i = 0; i < s.x.size(); ++i)
          d = std::max(d, std::fabs(s.x[i] - t.x[i]));
        best = std::min(best, d);
      }
      worst = std::max(worst, best);
    }
  };
  one_way(a, b);
  one_way(b, a);
  return worst;
}

}  // namespace

Lemma1Report check_lemma1(const Lee& e, const InterventionSpec& s,
                          const Lemma1Settings& settings) {
  Lemma1Report rep;
  rep.grid_points = settings.grid_points;

  Lee intervened = s.empty() ? e : intervene_lee(e, s);
  std::optional<Scm> via_scm, via_lee;
  try {
    via_scm = intervene_scm(induce_scm(e, settings.induce), s);
    via_lee = induce_scm(intervened, settings.induce);
  } catch (const ModelError& err) {
    rep.notes.push_back(err.what());
    rep.pass = false;
    return rep;
  }

  rep.structural_equal =
      scm_structurally_equal(*via_scm, *via_lee, &rep.differences);

  // functional equality of the two h sets on a seeded grid
  const Model& sys = e.system();
  std::mt19937_64 rng(settings.seed);
  bool functional_ok = true;
  for (int g = 0; g < settings.grid_points; ++g) {
    std::vector<double> state = draw_state(sys, rng, 5.0);
    for (size_t ai = 0; ai < sys.atoms().size(); ++ai) {
      try {
        std::vector<double> ya = via_scm->eval_fn(static_cast<int>(ai), state);
        std::vector<double> yb = via_lee->eval_fn(static_cast<int>(ai), state);
        for (size_t j = 0; j < ya.size(); ++j)
          rep.functional_max_dev =
              std::max(rep.functional_max_dev, std::fabs(ya[j] - yb[j]));
      } catch (const EvalError& err) {
        functional_ok = false;
        rep.notes.push_back(err.what());
      }
    }
  }
  functional_ok =
      functional_ok && rep.functional_max_dev <= settings.functional_tol;

  // solution sets of both SCMs against the intervened LEE
  SolveReport sa = solve_scm(*via_scm, settings.solve);
  SolveReport sb = solve_scm(*via_lee, settings.solve);
  SolveReport sl = solve_lee(intervened, settings.solve);
  double d1 = cluster_set_distance(sa.solutions, sb.solutions);
  double d2 = cluster_set_distance(sa.solutions, sl.solutions);
  rep.max_solution_dev = std::max(d1, d2);
  rep.solutions_match =
      !sa.solutions.empty() && sa.solutions.size() == sb.solutions.size() &&
      sa.solutions.size() == sl.solutions.size() &&
      rep.max_solution_dev <= 10.0 * settings.solve.tol;

  rep.pass = rep.structural_equal && functional_ok && rep.solutions_match;
  return rep;
}

Lee lee_of_scm(const Scm& m) {
  const Model& sys = m.space();
  std::map<std::string, ExprPtr> rhs;
  for (size_t ai = 0; ai < sys.atoms().size(); ++ai) {
    const StructuralFn& fn = m.fns()[ai];
    if (fn.kind != StructuralFn::Kind::closed)
      throw ModelError(
          "implicit structural function has no closed-form embedding: " +
          fn.atom);
    const Atom& a = sys.atoms()[ai];
    for (size_t j = 0; j < a.members.size(); ++j) {
      const std::string& v = sys.vars()[static_cast<size_t>(a.members[j])].name;
      rhs[v] = Expr::binary(BinOp::sub, fn.closed[j], Expr::var(v));
    }
  }
  return Lee(sys.with_rhs(std::move(rhs), {}));
}

std::vector<std::string> constant_components(const Scm& m) {
  const Model& sys = m.space();
  std::vector<std::string> out;
  for (size_t ai = 0; ai < sys.atoms().size(); ++ai) {
    const StructuralFn& fn = m.fns()[ai];
    if (fn.kind != StructuralFn::Kind::closed) continue;
    const Atom& a = sys.atoms()[ai];
    for (size_t j = 0; j < a.members.size(); ++j)
      if (fn.closed[j]->kind() == Expr::Kind::constant)
        out.push_back(sys.vars()[static_cast<size_t>(a.members[j])].name);
  }
  return out;
}

}  // namespace eqc
