#pragma once

#include <random>
#include <string>

#include "eqc/intervention.hpp"
#include "eqc/parser.hpp"

namespace test {

inline std::string model_path(const std::string& name) {
  return std::string(EQC_SOURCE_DIR) + "/models/" + name;
}

inline eqc::Model load(const std::string& name) {
  return eqc::load_model_file(model_path(name));
}

inline eqc::InterventionSpec hard(std::vector<std::string> targets,
                                  std::map<std::string, double> values) {
  eqc::InterventionSpec s;
  s.mode = eqc::InterventionSpec::Mode::hard;
  s.targets = std::move(targets);
  s.values = std::move(values);
  return s;
}

inline eqc::InterventionSpec soft(std::vector<std::string> targets,
                                  std::map<std::string, double> values,
                                  double kappa) {
  eqc::InterventionSpec s = hard(std::move(targets), std::move(values));
  s.mode = eqc::InterventionSpec::Mode::soft;
  s.kappa = kappa;
  return s;
}

// Small random model with polynomial right-hand sides over 2..5 scalar
// atoms: every RHS is a sum of constant, linear and quadratic terms.
inline eqc::Model random_polynomial_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_atoms_dist(2, 5);
  std::uniform_int_distribution<int> n_terms_dist(1, 3);
  std::uniform_int_distribution<int> kind_dist(0, 2);
  std::uniform_real_distribution<double> coef_dist(-2.0, 2.0);

  const int n = n_atoms_dist(rng);
  std::uniform_int_distribution<int> var_dist(0, n - 1);
  auto var_name = [](int i) { return "X" + std::to_string(i + 1); };

  std::string src = "model random\n";
  for (int i = 0; i < n; ++i)
    src += "var " + var_name(i) + " in [-inf, inf] init 0\n";
  for (int i = 0; i < n; ++i) {
    src += "ddt " + var_name(i) + " = ";
    const int terms = n_terms_dist(rng);
    for (int t = 0; t < terms; ++t) {
      if (t) src += " + ";
      double c = coef_dist(rng);
      if (c == 0.0) c = 1.0;
      std::string cs = "(" + eqc::format_double(c) + ")";
      switch (kind_dist(rng)) {
        case 0: src += cs; break;
        case 1: src += cs + "*" + var_name(var_dist(rng)); break;
        default:
          src += cs + "*" + var_name(var_dist(rng)) + "*" +
                 var_name(var_dist(rng));
      }
    }
    src += "\n";
  }
  return eqc::parse_model(src);
}

inline eqc::InterventionSpec random_intervention(const eqc::Model& m,
                                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value_dist(-2.0, 2.0);
  std::uniform_int_distribution<int> pick(0, 1);
  eqc::InterventionSpec s;
  s.mode = eqc::InterventionSpec::Mode::hard;
  for (const eqc::Atom& a : m.atoms()) {
    if (!pick(rng)) continue;
    s.targets.push_back(a.name);
    for (int slot : a.members)
      s.values[m.vars()[slot].name] = value_dist(rng);
  }
  if (s.targets.empty()) {
    const eqc::Atom& a = m.atoms().front();
    s.targets.push_back(a.name);
    for (int slot : a.members)
      s.values[m.vars()[slot].name] = value_dist(rng);
  }
  return s;
}

}  // namespace test
