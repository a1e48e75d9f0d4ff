#include "eqc/serialize.hpp"

namespace eqc {

Json state_to_json(const Model& m, const std::vector<double>& x) {
  Json out = Json::object();
  for (int i = 0; i < m.n_vars(); ++i) out[m.vars()[i].name] = x[i];
  return out;
}

Json to_json(const Model& m, const CausalGraph& g) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["model"] = m.name();
  out["nodes"] = g.nodes;
  Json edges = Json::array();
  for (auto [from, to] : g.edges)
    edges.push_back(Json::array({g.nodes[from], g.nodes[to]}));
  out["edges"] = edges;
  Json loops = Json::array();
  for (size_t i = 0; i < g.nodes.size(); ++i)
    if (g.self_loop[i]) loops.push_back(g.nodes[i]);
  out["self_loops"] = loops;
  return out;
}

Json to_json(const Model& m, const EquilibriumReport& rep) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["model"] = m.name();
  out["verdict"] = verdict_name(rep.verdict);
  out["residual"] = rep.residual;
  out["point"] = rep.point ? state_to_json(m, *rep.point) : Json();
  out["basin_samples"] = rep.basin_samples;
  out["distinct_limits"] = rep.distinct_limits;
  out["stability"] = rep.stability_label();
  if (!rep.jacobian_eigenvalues.empty()) {
    Json eig = Json::array();
    for (const auto& z : rep.jacobian_eigenvalues)
      eig.push_back(Json::array({z.real(), z.imag()}));
    out["jacobian_eigenvalues"] = eig;
  }
  if (!rep.residual_series.empty()) out["residual_series"] = rep.residual_series;
  if (!rep.samples.empty()) {
    Json samples = Json::array();
    for (const SampleSummary& s : rep.samples) {
      Json j;
      j["x0"] = state_to_json(m, s.x0);
      j["verdict"] = verdict_name(s.verdict);
      j["final_residual"] = s.final_residual;
      if (s.limit) j["limit"] = state_to_json(m, *s.limit);
      samples.push_back(std::move(j));
    }
    out["samples"] = samples;
  }
  if (!rep.frozen.empty()) out["frozen"] = rep.frozen;
  if (!rep.notes.empty()) out["notes"] = rep.notes;
  return out;
}

Json to_json(const Model& m, const SolveReport& rep) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["model"] = m.name();
  out["verdict"] = solve_verdict_name(rep.verdict);
  out["starts"] = rep.starts;
  out["converged_starts"] = rep.converged_starts;
  out["out_of_domain"] = rep.out_of_domain;
  Json sols = Json::array();
  for (const Solution& s : rep.solutions) {
    Json j;
    j["x"] = state_to_json(m, s.x);
    j["residual"] = s.residual;
    j["support"] = s.support;
    sols.push_back(std::move(j));
  }
  out["solutions"] = sols;
  if (!rep.notes.empty()) out["notes"] = rep.notes;
  return out;
}

Json to_json(const Lee& e) {
  const Model& sys = e.system();
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["model"] = sys.name();
  out["labels"] = e.labels();
  Json equations = Json::object();
  Json parents = Json::object();
  auto pa = e.parents();
  for (const std::string& label : e.labels()) {
    Json eq = Json::array();
    for (const ExprPtr& g : e.equation(label)) eq.push_back(to_text(g));
    equations[label] = eq;
    parents[label] = std::vector<std::string>(pa[label].begin(), pa[label].end());
  }
  out["equations"] = equations;
  out["parents"] = parents;
  return out;
}

Json to_json(const Scm& scm) {
  const Model& sys = scm.space();
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["model"] = sys.name();
  Json atoms = Json::array();
  for (const Atom& a : sys.atoms()) atoms.push_back(a.name);
  out["atoms"] = atoms;
  Json parents = Json::object();
  Json functions = Json::object();
  for (const StructuralFn& fn : scm.fns()) {
    parents[fn.atom] =
        std::vector<std::string>(fn.parents.begin(), fn.parents.end());
    Json f;
    if (fn.kind == StructuralFn::Kind::closed) {
      f["kind"] = "closed";
      Json exprs = Json::array();
      for (const ExprPtr& h : fn.closed) exprs.push_back(to_text(h));
      f["expr"] = exprs;
    } else {
      // implicit functions are defined by the source equations plus the
      // all-but-target intervention template, solved on demand
      f["kind"] = "implicit";
      f["source_model"] = sys.name();
      f["intervention_template"] = "do(all atoms except " + fn.atom + ")";
      Json res = Json::array();
      for (const ExprPtr& g : fn.residual) res.push_back(to_text(g));
      f["equation"] = res;
      f["solver"] = {{"n_starts", fn.solver.n_starts},
                     {"seed", fn.solver.seed},
                     {"tol", fn.solver.tol}};
    }
    functions[fn.atom] = std::move(f);
  }
  out["parents"] = parents;
  out["functions"] = functions;
  return out;
}

namespace {

Json to_json(const SolvabilityReport& rep) {
  Json out;
  out["ok"] = rep.ok;
  Json atoms = Json::array();
  for (const AtomSolvability& a : rep.atoms) {
    Json j;
    j["atom"] = a.atom;
    j["ok"] = a.ok;
    j["method"] = a.method;
    if (!a.note.empty()) j["note"] = a.note;
    if (!a.witness.empty()) j["witness"] = a.witness;
    atoms.push_back(std::move(j));
  }
  out["atoms"] = atoms;
  return out;
}

}  // namespace

Json to_json(const DiagramReport& rep) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["model"] = rep.model_name;
  out["intervention"] = rep.intervention;
  out["pass"] = rep.pass;
  out["caveat"] = rep.caveat;

  out["lee_graph_matches_model"] = rep.lee_graph_matches_model;

  Json t1;
  t1["structural_equal"] = rep.theorem1.structural_equal;
  t1["solution_checked"] = rep.theorem1.solution_checked;
  t1["max_solution_dev"] = rep.theorem1.max_solution_dev;
  t1["pass"] = rep.theorem1.pass;
  if (!rep.theorem1.differences.empty())
    t1["differences"] = rep.theorem1.differences;
  out["theorem1"] = t1;

  out["structural_solvability"] = {
      {"observational", to_json(rep.solvability_observational)},
      {"intervened", to_json(rep.solvability_intervened)}};

  if (rep.lemma1_checked) {
    Json l1;
    l1["structural_equal"] = rep.lemma1.structural_equal;
    l1["functional_max_dev"] = rep.lemma1.functional_max_dev;
    l1["grid_points"] = rep.lemma1.grid_points;
    l1["solutions_match"] = rep.lemma1.solutions_match;
    l1["max_solution_dev"] = rep.lemma1.max_solution_dev;
    l1["pass"] = rep.lemma1.pass;
    if (!rep.lemma1.differences.empty())
      l1["differences"] = rep.lemma1.differences;
    if (!rep.lemma1.notes.empty()) l1["notes"] = rep.lemma1.notes;
    out["lemma1"] = l1;
  }

  out["theorem2"] = {{"checked", rep.theorem2_checked},
                     {"max_dev", rep.theorem2_dev}};
  if (!rep.notes.empty()) out["notes"] = rep.notes;
  return out;
}

Json to_json(const Model& m, const std::vector<WrtResult>& results) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["model"] = m.name();
  Json list = Json::array();
  for (const WrtResult& r : results) {
    Json j;
    j["targets"] = r.targets;
    j["stable"] = r.stable;
    Json draws = Json::array();
    for (const WrtDraw& d : r.draws) {
      Json dj;
      dj["xi"] = d.xi;
      dj["verdict"] = verdict_name(d.report.verdict);
      dj["stability"] = d.report.stability_label();
      dj["distinct_limits"] = d.report.distinct_limits;
      if (d.report.point) dj["point"] = state_to_json(m, *d.report.point);
      draws.push_back(std::move(dj));
    }
    j["draws"] = draws;
    list.push_back(std::move(j));
  }
  out["results"] = list;
  return out;
}

std::string trajectory_csv(const Model& m, const Trajectory& traj) {
  std::string out = "t";
  for (const VarDecl& v : m.vars()) out += "," + v.name;
  out += "\n";
  for (size_t s = 0; s < traj.times.size(); ++s) {
    out += format_double(traj.times[s]);
    for (double x : traj.states[s]) out += "," + format_double(x);
    out += "\n";
  }
  return out;
}

}  // namespace eqc
