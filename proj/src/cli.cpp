#include "eqc/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eqc/errors.hpp"
#include "eqc/parser.hpp"
#include "eqc/serialize.hpp"

namespace eqc {

namespace {

double parse_value(const std::string& text, const std::string& context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ModelError("bad number '" + text + "' in " + context);
  return v;
}

// split on top-level commas (commas inside parentheses group values)
std::vector<std::string> split_clauses(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    cur += c;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

InterventionSpec parse_do_clause(const std::string& text, const Model& m,
                                 std::optional<double> kappa) {
  InterventionSpec spec;
  if (kappa) {
    spec.mode = InterventionSpec::Mode::soft;
    spec.kappa = *kappa;
  }
  for (const std::string& raw : split_clauses(text)) {
    std::string clause = trim(raw);
    if (clause.empty()) continue;
    size_t eq = clause.find('=');
    if (eq == std::string::npos)
      throw ModelError("do-clause '" + clause + "' is missing '='");
    std::string atom = trim(clause.substr(0, eq));
    std::string value = trim(clause.substr(eq + 1));
    int ai = m.atom_index(atom);
    if (ai < 0) throw ModelError("unknown atom in do-clause: " + atom);
    const Atom& a = m.atoms()[static_cast<size_t>(ai)];

    std::vector<double> values;
    if (!value.empty() && value.front() == '(') {
      if (value.back() != ')')
        throw ModelError("unbalanced parentheses in do-clause for " + atom);
      std::string inner = value.substr(1, value.size() - 2);
      std::string cur;
      for (char c : inner) {
        if (c == ',') {
          values.push_back(parse_value(cur, "do-clause for " + atom));
          cur.clear();
        } else {
          cur += c;
        }
      }
      values.push_back(parse_value(cur, "do-clause for " + atom));
    } else {
      values.push_back(parse_value(value, "do-clause for " + atom));
    }

    if (values.size() != a.members.size())
      throw ModelError("do-clause for " + atom + " has " +
                       std::to_string(values.size()) + " value(s), atom has " +
                       std::to_string(a.members.size()) + " member(s)");
    spec.targets.push_back(atom);
    for (size_t j = 0; j < values.size(); ++j)
      spec.values[m.vars()[static_cast<size_t>(a.members[j])].name] = values[j];
  }
  return spec;
}

std::string resolve_model_path(const std::string& path) {
  std::ifstream probe(path);
  if (probe.good()) return path;
  if (const char* env = std::getenv("EQCAUSAL_MODELS")) {
    std::string dirs(env);
    size_t start = 0;
    while (start <= dirs.size()) {
      size_t colon = dirs.find(':', start);
      std::string dir = colon == std::string::npos
                            ? dirs.substr(start)
                            : dirs.substr(start, colon - start);
      if (!dir.empty()) {
        std::string candidate = dir + "/" + path;
        std::ifstream p(candidate);
        if (p.good()) return candidate;
      }
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
  }
  return path;  // let the loader report the failure
}

namespace {

struct CommonOpts {
  std::string model_path;
  std::string do_clause;
  double kappa = 0.0;
  bool has_kappa = false;
  double dt = 1e-3;
  double t_max = 1e3;
  double tol = 1e-8;
  int starts = 32;
  int samples = 16;
  unsigned seed = 1;
  std::string format = "json";
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_do) {
  cmd->add_option("--model", o.model_path, "model file")->required();
  auto* dopt = cmd->add_option("--do", o.do_clause,
                               "do-clause, e.g. \"X2=2\" or \"X2=(1.7,0)\"");
  if (needs_do) dopt->required();
  cmd->add_option("--kappa", o.kappa, "soft-intervention gain")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--dt", o.dt, "integration step");
  cmd->add_option("--t-max", o.t_max, "integration horizon");
  cmd->add_option("--tol", o.tol, "residual tolerance");
  cmd->add_option("--starts", o.starts, "solver multi-start count");
  cmd->add_option("--samples", o.samples, "stability probe sample count");
  cmd->add_option("--seed", o.seed, "random seed (echoed in reports)");
  cmd->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out_path, "output file (default stdout)");
}

Json run_header(const std::string& subcommand, const CommonOpts& o) {
  Json run;
  run["subcommand"] = subcommand;
  run["model_path"] = o.model_path;
  if (!o.do_clause.empty()) run["do"] = o.do_clause;
  if (o.has_kappa) run["kappa"] = o.kappa;
  run["settings"] = {{"dt", o.dt},     {"t_max", o.t_max},
                     {"tol", o.tol},   {"starts", o.starts},
                     {"samples", o.samples}};
  run["seed"] = o.seed;
  return run;
}

void emit(const std::string& text, const CommonOpts& o, std::ostream& out) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw ModelError("cannot write output file: " + o.out_path);
  f << text;
}

void emit_json(Json j, const std::string& subcommand, const CommonOpts& o,
               std::ostream& out) {
  j["run"] = run_header(subcommand, o);
  emit(j.dump(2) + "\n", o, out);
}

IntegrateSettings integrate_settings(const CommonOpts& o) {
  IntegrateSettings s;
  s.dt = o.dt;
  s.t_max = o.t_max;
  s.tol = o.tol;
  return s;
}

SolveSettings solve_settings(const CommonOpts& o) {
  SolveSettings s;
  s.n_starts = o.starts;
  s.seed = o.seed;
  s.tol = o.tol;
  return s;
}

// model plus the optional intervention from --do/--kappa
struct Loaded {
  Model model;
  InterventionSpec spec;  // empty targets when no --do
};

Loaded load(const CommonOpts& o) {
  Model m = load_model_file(resolve_model_path(o.model_path));
  InterventionSpec spec;
  if (!o.do_clause.empty()) {
    spec = parse_do_clause(
        o.do_clause, m,
        o.has_kappa ? std::optional<double>(o.kappa) : std::nullopt);
  }
  return {std::move(m), std::move(spec)};
}

Model apply_spec(const Model& m, const InterventionSpec& spec) {
  if (spec.empty()) return m;
  if (spec.mode == InterventionSpec::Mode::soft)
    return apply_soft_intervention(m, spec);
  return apply_hard_intervention(m, spec);
}

// hard interventions clamp at the equation level; soft ones only exist at
// the model level, so derive from the feedback-augmented system instead
Lee lee_for(const Loaded& l) {
  if (l.spec.empty()) return derive_lee(l.model);
  if (l.spec.mode == InterventionSpec::Mode::soft)
    return derive_lee(apply_soft_intervention(l.model, l.spec));
  return intervene_lee(derive_lee(l.model), l.spec);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"equilibrium causality toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  auto* simulate = app.add_subcommand("simulate", "integrate and emit the trajectory");
  auto* equilibrium =
      app.add_subcommand("equilibrium", "integrate and classify the limit");
  auto* intervene =
      app.add_subcommand("intervene", "print the intervened model file");
  auto* lee_cmd = app.add_subcommand("lee", "derive equilibrium equations");
  auto* scm_cmd = app.add_subcommand("scm", "derive the induced SCM");
  auto* solve = app.add_subcommand("solve", "solve the equilibrium equations");
  auto* probe = app.add_subcommand("probe", "sampled stability probe");
  auto* verify =
      app.add_subcommand("verify", "check the intervention/derivation square");

  add_common(simulate, o, false);
  add_common(equilibrium, o, false);
  add_common(intervene, o, true);
  add_common(lee_cmd, o, false);
  add_common(scm_cmd, o, false);
  add_common(solve, o, false);
  add_common(probe, o, false);
  add_common(verify, o, false);
  bool project = false;
  scm_cmd->add_flag("--project", project,
                    "list identically-constant components");
  bool force = false;
  scm_cmd->add_flag("--force", force, "skip the solvability precondition");

  std::vector<const char*> argv;
  argv.push_back("eqcausal");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  o.has_kappa = (simulate->count("--kappa") + equilibrium->count("--kappa") +
                 intervene->count("--kappa") + lee_cmd->count("--kappa") +
                 scm_cmd->count("--kappa") + solve->count("--kappa") +
                 probe->count("--kappa") + verify->count("--kappa")) > 0;

  if (simulate->parsed() && simulate->count("--format") == 0)
    o.format = "csv";  // trajectories default to CSV; reports to JSON

  try {
    if (simulate->parsed()) {
      Loaded l = load(o);
      Model m = apply_spec(l.model, l.spec);
      Trajectory traj = integrate(m, integrate_settings(o));
      if (o.format == "csv") {
        emit(trajectory_csv(m, traj), o, out);
      } else {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["model"] = m.name();
        j["termination"] = termination_name(traj.termination);
        j["times"] = traj.times;
        Json states = Json::array();
        for (const auto& x : traj.states) states.push_back(state_to_json(m, x));
        j["states"] = states;
        emit_json(std::move(j), "simulate", o, out);
      }
      return 0;
    }

    if (equilibrium->parsed()) {
      Loaded l = load(o);
      Model m = apply_spec(l.model, l.spec);
      Trajectory traj = integrate(m, integrate_settings(o));
      EquilibriumReport rep = detect_equilibrium(traj, m, o.tol);
      if (rep.point) {
        try {
          rep.jacobian_eigenvalues = jacobian_eigenvalues(m, *rep.point);
        } catch (const EvalError&) {
        }
      }
      emit_json(to_json(m, rep), "equilibrium", o, out);
      return 0;
    }

    if (intervene->parsed()) {
      Loaded l = load(o);
      emit(to_text(apply_spec(l.model, l.spec)), o, out);
      return 0;
    }

    if (lee_cmd->parsed()) {
      Loaded l = load(o);
      emit_json(to_json(lee_for(l)), "lee", o, out);
      return 0;
    }

    if (scm_cmd->parsed()) {
      Loaded l = load(o);
      InduceSettings is;
      is.force = force;
      is.solvability.seed = o.seed;
      Scm scm = induce_scm(lee_for(l), is);
      Json j = to_json(scm);
      if (project) j["constant_components"] = constant_components(scm);
      emit_json(std::move(j), "scm", o, out);
      return 0;
    }

    if (solve->parsed()) {
      Loaded l = load(o);
      SolveReport rep = solve_lee(lee_for(l), solve_settings(o));
      emit_json(to_json(l.model, rep), "solve", o, out);
      return 0;
    }

    if (probe->parsed()) {
      Loaded l = load(o);
      Model m = apply_spec(l.model, l.spec);
      ProbeSettings ps;
      ps.n_samples = o.samples;
      ps.seed = o.seed;
      ps.tol = o.tol;
      ps.integrate = integrate_settings(o);
      EquilibriumReport rep = probe_stability(m, ps);
      emit_json(to_json(m, rep), "probe", o, out);
      return 0;
    }

    if (verify->parsed()) {
      Loaded l = load(o);
      if (l.spec.mode != InterventionSpec::Mode::hard)
        throw ModelError("verify requires a hard intervention");
      DiagramSettings ds;
      ds.integrate = integrate_settings(o);
      ds.solve = solve_settings(o);
      ds.theorem1.solve = ds.solve;
      ds.theorem1.integrate = ds.integrate;
      ds.lemma1.solve = ds.solve;
      ds.lemma1.seed = o.seed;
      DiagramReport rep = verify_diagram(l.model, l.spec, ds);
      emit_json(to_json(rep), "verify", o, out);
      return rep.pass ? 0 : 1;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const EvalError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace eqc
