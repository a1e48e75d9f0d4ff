#include <doctest.h>

#include <sstream>

#include "eqc/cli.hpp"
#include "eqc/parser.hpp"
#include "helpers.hpp"

using namespace eqc;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("do-clause parsing") {
  Model lv = test::load("lotka_volterra.mdl");
  Model ms = test::load("mass_spring_d2.mdl");

  SUBCASE("scalar clamp") {
    InterventionSpec s = parse_do_clause("X2=2.0", lv);
    CHECK(s.mode == InterventionSpec::Mode::hard);
    CHECK(s.targets == std::vector<std::string>{"X2"});
    CHECK(s.values.at("X2") == 2.0);
  }

  SUBCASE("grouped clamp binds members in declaration order") {
    InterventionSpec s = parse_do_clause("X2=(1.7,0)", ms);
    CHECK(s.values.at("Q2") == 1.7);
    CHECK(s.values.at("P2") == 0.0);
  }

  SUBCASE("multiple clauses") {
    InterventionSpec s = parse_do_clause("X1=(0.4, 0), X2=(2.5, 0)", ms);
    CHECK(s.targets.size() == 2);
    CHECK(s.values.size() == 4);
  }

  SUBCASE("kappa switches to soft mode") {
    InterventionSpec s = parse_do_clause("X2=2.0", lv, 100.0);
    CHECK(s.mode == InterventionSpec::Mode::soft);
    CHECK(s.kappa == 100.0);
  }

  SUBCASE("unknown atom") {
    CHECK_THROWS_AS(parse_do_clause("Z=1", lv), ModelError);
  }

  SUBCASE("arity mismatch") {
    CHECK_THROWS_AS(parse_do_clause("X2=(1.7)", ms), ModelError);
    CHECK_THROWS_AS(parse_do_clause("X2=(1.7,0,3)", ms), ModelError);
    CHECK_THROWS_AS(parse_do_clause("X2=1.7", ms), ModelError);
  }
}

TEST_CASE("verify exits 0 on pass and 1 on failure") {
  CliResult pass = run({"verify", "--model", test::model_path("mass_spring_d4.mdl"),
                        "--do", "X2=(1.7,0)"});
  CHECK(pass.code == 0);
  CHECK(pass.out.find("\"pass\": true") != std::string::npos);

  CliResult fail = run({"verify", "--model", test::model_path("lotka_volterra.mdl"),
                        "--do", "X2=2"});
  CHECK(fail.code == 1);
  CHECK(fail.out.find("\"pass\": false") != std::string::npos);
}

TEST_CASE("equilibrium on the oscillator reports oscillatory, exit 0") {
  CliResult r = run({"equilibrium", "--model",
                     test::model_path("lotka_volterra.mdl"), "--t-max", "200"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"verdict\": \"oscillatory\"") != std::string::npos);
}

TEST_CASE("missing model file exits 2") {
  CliResult r = run({"simulate", "--model", "nonexistent.mdl"});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({"simulate"}).code == 2);              // missing --model
  CHECK(run({"frobnicate"}).code == 2);            // unknown subcommand
  CHECK(run({"intervene", "--model",
             test::model_path("lotka_volterra.mdl")})
            .code == 2);                           // intervene needs --do
  CHECK(run({"solve", "--model", test::model_path("lotka_volterra.mdl"),
             "--do", "Z=1"})
            .code == 2);                           // unknown atom
}

TEST_CASE("simulate emits CSV with declaration-ordered columns") {
  CliResult r = run({"simulate", "--model", test::model_path("mass_spring_d2.mdl"),
                     "--t-max", "0.01"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,Q1,P1,Q2,P2");
  std::string first;
  std::getline(lines, first);
  CHECK(first.substr(0, 2) == "0,");
}

TEST_CASE("intervened model file round-trips through the parser") {
  CliResult r = run({"intervene", "--model",
                     test::model_path("lotka_volterra.mdl"), "--do", "X2=2"});
  REQUIRE(r.code == 0);
  Model m = parse_model(r.out);
  CHECK(m.rhs_is_zero(m.var_slot("X2")));
  CHECK(m.vars()[m.var_slot("X2")].init == 2.0);

  CliResult soft = run({"intervene", "--model",
                        test::model_path("lotka_volterra.mdl"), "--do", "X2=2",
                        "--kappa", "100"});
  REQUIRE(soft.code == 0);
  Model sm = parse_model(soft.out);
  CHECK(to_text(sm.rhs(sm.var_slot("X2"))).find("100*(2 - X2)") !=
        std::string::npos);
}

TEST_CASE("reports are byte-identical across reruns with the same seed") {
  std::vector<std::string> args{"probe", "--model",
                                test::model_path("mass_spring_d2.mdl"),
                                "--samples", "4", "--seed", "42",
                                "--dt", "0.01"};
  CliResult a = run(args);
  CliResult b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  CliResult c = run({"solve", "--model", test::model_path("lotka_volterra.mdl"),
                     "--seed", "7"});
  CliResult d = run({"solve", "--model", test::model_path("lotka_volterra.mdl"),
                     "--seed", "7"});
  CHECK(c.out == d.out);
  CHECK(c.out.find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("lee and scm subcommands emit their serializations") {
  CliResult lee = run({"lee", "--model", test::model_path("lotka_volterra.mdl"),
                       "--do", "X2=2"});
  REQUIRE(lee.code == 0);
  CHECK(lee.out.find("\"X2 - 2\"") != std::string::npos);

  CliResult scm = run({"scm", "--model",
                       test::model_path("mass_spring_d2.mdl"), "--project"});
  REQUIRE(scm.code == 0);
  CHECK(scm.out.find("\"constant_components\"") != std::string::npos);

  // inducing an SCM from the unstable system is a reported error
  CliResult bad = run({"scm", "--model", test::model_path("lotka_volterra.mdl")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("not structurally solvable") != std::string::npos);
}

TEST_CASE("model search path via EQCAUSAL_MODELS") {
  setenv("EQCAUSAL_MODELS", (std::string(EQC_SOURCE_DIR) + "/models").c_str(),
         1);
  CliResult r = run({"equilibrium", "--model", "acyclic_chain.mdl"});
  unsetenv("EQCAUSAL_MODELS");
  CHECK(r.code == 0);
  CHECK(r.out.find("\"verdict\": \"converged\"") != std::string::npos);
}
