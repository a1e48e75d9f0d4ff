#include <doctest.h>

#include <cmath>

#include "eqc/integrate.hpp"
#include "eqc/intervention.hpp"
#include "eqc/lee.hpp"
#include "eqc/parser.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace eqc;

TEST_CASE("hard intervention rewrites the clamped equations only") {
  Model lv = test::load("lotka_volterra.mdl");
  Model done = apply_hard_intervention(lv, test::hard({"X2"}, {{"X2", 2.0}}));

  CHECK(done.rhs_is_zero(done.var_slot("X2")));
  CHECK(done.vars()[done.var_slot("X2")].init == 2.0);
  CHECK(expr_equal(done.rhs(done.var_slot("X1")),
                   lv.rhs(lv.var_slot("X1"))));
  CHECK(done.vars()[done.var_slot("X1")].init == 1.0);
}

TEST_CASE("clamping every atom zeroes the whole system") {
  Model lv = test::load("lotka_volterra.mdl");
  Model done = apply_hard_intervention(
      lv, test::hard({"X1", "X2"}, {{"X1", 3.0}, {"X2", 4.0}}));
  for (int i = 0; i < done.n_vars(); ++i) CHECK(done.rhs_is_zero(i));
  CHECK(done.initial_state() == std::vector<double>{3.0, 4.0});
}

TEST_CASE("grouped intervention clamps both members") {
  Model ms = test::load("mass_spring_d2.mdl");
  Model done = apply_hard_intervention(
      ms, test::hard({"X2"}, {{"Q2", 2.5}, {"P2", 0.0}}));
  CHECK(done.rhs_is_zero(done.var_slot("Q2")));
  CHECK(done.rhs_is_zero(done.var_slot("P2")));
  CHECK(done.vars()[done.var_slot("Q2")].init == 2.5);
  CHECK(done.vars()[done.var_slot("P2")].init == 0.0);
}

TEST_CASE("intervention validation") {
  Model lv = test::load("lotka_volterra.mdl");
  CHECK_THROWS_AS(
      apply_hard_intervention(lv, test::hard({"nope"}, {{"nope", 1.0}})),
      ModelError);
  // negative abundance violates the declared domain [0, inf)
  CHECK_THROWS_AS(
      apply_hard_intervention(lv, test::hard({"X2"}, {{"X2", -1.0}})),
      ModelError);
  Model ms = test::load("mass_spring_d2.mdl");
  CHECK_THROWS_AS(
      apply_hard_intervention(ms, test::hard({"X2"}, {{"Q2", 1.0}})),
      ModelError);  // missing member value
}

TEST_CASE("soft intervention adds the feedback term") {
  Model lv = test::load("lotka_volterra.mdl");
  Model soft =
      apply_soft_intervention(lv, test::soft({"X2"}, {{"X2", 2.0}}, 100.0));
  CHECK(to_text(soft.rhs(soft.var_slot("X2"))) ==
        "-X2*(theta22 - theta21*X1) + 100*(2 - X2)");
  CHECK(soft.vars()[soft.var_slot("X2")].init == 0.5);  // init unchanged
}

TEST_CASE("soft-clamped predator settles at the feedback fixed point") {
  // root of -x2 + kappa*(2 - x2) at x1 = 0, found by bisection
  const double kappa = 100.0;
  double expected = oracle::bisect(
      [&](double x2) { return -x2 + kappa * (2.0 - x2); }, 0.0, 3.0);
  CHECK(expected == doctest::Approx(200.0 / 101.0).epsilon(1e-12));

  Model lv = test::load("lotka_volterra.mdl");
  Model soft =
      apply_soft_intervention(lv, test::soft({"X2"}, {{"X2", 2.0}}, kappa));
  IntegrateSettings is;
  is.t_max = 100.0;
  Trajectory traj = integrate(soft, is);
  EquilibriumReport eq = detect_equilibrium(traj, soft, 1e-8);
  REQUIRE(eq.verdict == Verdict::converged);
  CHECK((*eq.point)[1] == doctest::Approx(expected).epsilon(1e-6));
  CHECK(std::fabs((*eq.point)[0]) < 1e-6);
}

TEST_CASE("fixed point preserved when the soft target is already settled") {
  Model still = parse_model(
      "model still\n"
      "var X in [-inf, inf] init 1.5\n"
      "ddt X = 0\n");
  for (double kappa : {1.0, 10.0, 1000.0}) {
    Model soft =
        apply_soft_intervention(still, test::soft({"X"}, {{"X", 1.5}}, kappa));
    Trajectory traj = integrate(soft, 10.0, 1e-3);
    CHECK(traj.states.back()[0] == 1.5);
    CHECK(detect_equilibrium(traj, soft, 1e-8).verdict == Verdict::converged);
  }
}

TEST_CASE("integrator matches the closed-form decay") {
  Model decay = parse_model(
      "model decay\n"
      "var X in [-inf, inf] init 1\n"
      "ddt X = -X\n");
  Trajectory traj = integrate(decay, 1.0, 1e-3);
  REQUIRE(traj.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(traj.states.back()[0] ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("all-zero dynamics converge at the first window") {
  Model still = parse_model(
      "model still\n"
      "var X in [-inf, inf] init 2\n"
      "ddt X = 0\n");
  Trajectory traj = integrate(still, 1000.0, 1e-3);
  CHECK(traj.termination == Termination::converged);
  for (const auto& x : traj.states) CHECK(x[0] == 2.0);
  EquilibriumReport eq = detect_equilibrium(traj, still, 1e-8);
  CHECK(eq.verdict == Verdict::converged);
  CHECK((*eq.point)[0] == 2.0);
}

TEST_CASE("unintervened predator-prey keeps oscillating") {
  Model lv = test::load("lotka_volterra.mdl");
  IntegrateSettings is;
  is.t_max = 200.0;
  Trajectory traj = integrate_from(lv, {1.0, 0.5}, is);
  CHECK(traj.termination == Termination::reached_t_max);
  EquilibriumReport eq = detect_equilibrium(traj, lv, 1e-8);
  CHECK(eq.verdict == Verdict::oscillatory);
  for (double r : eq.residual_series) CHECK(r > 1e-8);
}

TEST_CASE("clamped variables stay bit-exact along the trajectory") {
  Model lv = test::load("lotka_volterra.mdl");
  Model done = apply_hard_intervention(lv, test::hard({"X2"}, {{"X2", 2.0}}));
  IntegrateSettings is;
  is.t_max = 50.0;
  Trajectory traj = integrate(done, is);
  for (const auto& x : traj.states) CHECK(x[1] == 2.0);
}

TEST_CASE("divergence guard terminates the unstable clamp cleanly") {
  // xi2 < theta11/theta12 leaves prey growth positive: X1 blows up
  Model lv = test::load("lotka_volterra.mdl");
  Model done = apply_hard_intervention(lv, test::hard({"X2"}, {{"X2", 0.5}}));
  Trajectory traj = integrate(done, 100.0, 1e-3);
  CHECK(traj.termination == Termination::diverged);
  CHECK(detect_equilibrium(traj, done, 1e-8).verdict == Verdict::diverged);
}

TEST_CASE("evaluation errors propagate with the offending time") {
  Model bad = parse_model(
      "model bad\n"
      "var X in [-inf, inf] init 0.5\n"
      "ddt X = log(X) - 1\n");
  // X decreases through 0, where log raises
  try {
    integrate(bad, 100.0, 1e-3);
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("at t=") != std::string::npos);
  }
}

TEST_CASE("damped chain probes stable with the elimination-oracle limit") {
  Model ms = test::load("mass_spring_d4.mdl");
  ProbeSettings ps;
  ps.n_samples = 16;
  ps.seed = 3;
  EquilibriumReport rep = probe_stability(ms, ps);
  CHECK(rep.verdict == Verdict::converged);
  CHECK(rep.distinct_limits == 1);
  CHECK(rep.stable_sampled());
  CHECK(rep.stability_label() == "stable (sampled)");

  std::vector<double> q = oracle::mass_spring_equilibrium(
      4, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 1}, 5.0);
  REQUIRE(rep.point);
  for (int i = 0; i < 4; ++i) {
    CHECK((*rep.point)[ms.var_slot("Q" + std::to_string(i + 1))] ==
          doctest::Approx(q[i]).epsilon(1e-6));
    CHECK(std::fabs((*rep.point)[ms.var_slot("P" + std::to_string(i + 1))]) <=
          1e-6);
  }
}

TEST_CASE("predator-prey is not stable under sampling") {
  Model lv = test::load("lotka_volterra.mdl");
  ProbeSettings ps;
  ps.n_samples = 16;
  ps.seed = 11;
  ps.integrate.t_max = 200.0;
  EquilibriumReport rep = probe_stability(lv, ps);
  CHECK_FALSE(rep.stable_sampled());
  CHECK(rep.verdict == Verdict::oscillatory);
}

TEST_CASE("clamped predator yields the unique limit (0, xi2)") {
  Model lv = test::load("lotka_volterra.mdl");
  Model done = apply_hard_intervention(lv, test::hard({"X2"}, {{"X2", 2.0}}));
  ProbeSettings ps;
  ps.n_samples = 16;
  ps.seed = 5;
  EquilibriumReport rep = probe_stability(done, ps);
  CHECK(rep.stable_sampled());
  CHECK(rep.frozen == std::vector<std::string>{"X2"});
  REQUIRE(rep.point);
  CHECK(std::fabs((*rep.point)[0]) < 1e-6);
  CHECK((*rep.point)[1] == 2.0);
}

TEST_CASE("converged probes satisfy the residual bound they report") {
  Model ms = test::load("mass_spring_d2.mdl");
  ProbeSettings ps;
  ps.n_samples = 8;
  ps.seed = 2;
  EquilibriumReport rep = probe_stability(ms, ps);
  REQUIRE(rep.verdict == Verdict::converged);
  CHECK(rep.residual <= ps.tol);
  for (const SampleSummary& s : rep.samples) {
    CHECK(s.verdict == Verdict::converged);
    CHECK(s.final_residual <= ps.tol);
  }
}

TEST_CASE("stability with respect to position interventions") {
  Model ms = test::load("mass_spring_d4.mdl");
  WrtSettings ws;
  ws.xi_samples = 2;
  ws.seed = 17;
  ws.probe.n_samples = 4;
  ws.probe.integrate.dt = 0.01;
  std::vector<std::vector<std::string>> family{
      {"X1"}, {"X2"}, {"X3"}, {"X4"}};
  // momenta must clamp to zero alongside each position
  for (auto& targets : family) {
    int i = targets[0].back() - '0';
    ws.xi_range["P" + std::to_string(i)] = {0.0, 0.0};
  }
  auto results = probe_stability_wrt(ms, family, ws);
  REQUIRE(results.size() == 4);
  for (const WrtResult& r : results) {
    CAPTURE(r.targets[0]);
    CHECK(r.stable);
  }
}

TEST_CASE("empty target set reduces to plain stability probing") {
  Model ms = test::load("mass_spring_d2.mdl");
  WrtSettings ws;
  ws.probe.n_samples = 4;
  ws.probe.seed = 9;
  ws.probe.integrate.dt = 0.01;
  auto results = probe_stability_wrt(ms, {{}}, ws);
  REQUIRE(results.size() == 1);
  REQUIRE(results[0].draws.size() == 1);
  CHECK(results[0].stable);

  ProbeSettings ps = ws.probe;
  EquilibriumReport direct = probe_stability(ms, ps);
  CHECK(results[0].draws[0].report.verdict == direct.verdict);
  CHECK(results[0].draws[0].report.distinct_limits == direct.distinct_limits);
}

TEST_CASE("clamped predator family over xi2 in (1, 2]") {
  Model lv = test::load("lotka_volterra.mdl");
  WrtSettings ws;
  ws.xi_samples = 3;
  ws.seed = 23;
  ws.xi_range["X2"] = {1.0 + 1e-3, 2.0};
  ws.probe.n_samples = 4;
  auto results = probe_stability_wrt(lv, {{"X2"}}, ws);
  REQUIRE(results.size() == 1);
  CHECK(results[0].stable);
  for (const WrtDraw& d : results[0].draws) {
    REQUIRE(d.report.point);
    // integrate-and-check: limit is (0, xi2)
    CHECK(std::fabs((*d.report.point)[0]) < 1e-6);
    CHECK((*d.report.point)[1] == doctest::Approx(d.xi.at("X2")));
  }
}

TEST_CASE("finite-difference Jacobian matches the paper's spectrum") {
  Model lv = test::load("lotka_volterra.mdl");

  SUBCASE("at the trivial equilibrium") {
    Eigen::MatrixXd J = jacobian(lv, {0.0, 0.0});
    CHECK(J(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(J(0, 1) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(J(1, 0) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(J(1, 1) == doctest::Approx(-1.0).epsilon(1e-6));
    auto eig = jacobian_eigenvalues(lv, {0.0, 0.0});
    REQUIRE(eig.size() == 2);
    CHECK(eig[0].real() == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(eig[1].real() == doctest::Approx(1.0).epsilon(1e-4));
  }

  SUBCASE("at the interior equilibrium") {
    auto eig = jacobian_eigenvalues(lv, {1.0, 1.0});
    REQUIRE(eig.size() == 2);
    for (const auto& z : eig) CHECK(std::fabs(z.real()) < 1e-4);
    CHECK(std::fabs(std::fabs(eig[0].imag()) - 1.0) < 1e-4);
  }

  SUBCASE("scalar linear model") {
    Model lin = parse_model(
        "model lin\n"
        "param a = 2.5\n"
        "var X in [-inf, inf] init 0\n"
        "ddt X = a*X\n");
    Eigen::MatrixXd J = jacobian(lin, {0.7});
    REQUIRE(J.rows() == 1);
    CHECK(J(0, 0) == doctest::Approx(2.5).epsilon(1e-6));
  }
}

TEST_CASE("Jacobian against the hand-computed predator-prey derivative") {
  const double t11 = 1.3, t12 = 0.7, t21 = 2.1, t22 = 0.9;
  Model lv = parse_model(
      "model lv\n"
      "param theta11 = 1.3\n"
      "param theta12 = 0.7\n"
      "param theta21 = 2.1\n"
      "param theta22 = 0.9\n"
      "var X1 in [0, inf] init 1\n"
      "var X2 in [0, inf] init 1\n"
      "ddt X1 = X1*(theta11 - theta12*X2)\n"
      "ddt X2 = -X2*(theta22 - theta21*X1)\n");
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coord(0.1, 4.0);
  for (int trial = 0; trial < 10; ++trial) {
    double x1 = coord(rng), x2 = coord(rng);
    Eigen::MatrixXd J = jacobian(lv, {x1, x2});
    CHECK(std::fabs(J(0, 0) - (t11 - t12 * x2)) <= 1e-4);
    CHECK(std::fabs(J(0, 1) - (-t12 * x1)) <= 1e-4);
    CHECK(std::fabs(J(1, 0) - (t21 * x2)) <= 1e-4);
    CHECK(std::fabs(J(1, 1) - (-t22 + t21 * x1)) <= 1e-4);
  }
}

namespace {

// equilibrium of the soft-intervened system, via the algebraic solver
std::vector<double> soft_equilibrium(const Model& m,
                                     const InterventionSpec& hard_spec,
                                     double kappa) {
  InterventionSpec spec = hard_spec;
  spec.mode = InterventionSpec::Mode::soft;
  spec.kappa = kappa;
  Model soft = apply_soft_intervention(m, spec);
  SolveReport rep = solve_lee(derive_lee(soft), 32, 19, 1e-10);
  REQUIRE(rep.verdict == SolveVerdict::unique);
  return rep.solutions.front().x;
}

double dist_inf(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("kappa limit: soft equilibria approach the hard clamp") {
  struct Case {
    const char* file;
    InterventionSpec spec;
  };
  std::vector<Case> cases{
      {"lotka_volterra.mdl", test::hard({"X2"}, {{"X2", 2.0}})},
      {"mass_spring_d4.mdl", test::hard({"X2"}, {{"Q2", 1.7}, {"P2", 0.0}})},
  };
  for (const Case& c : cases) {
    CAPTURE(c.file);
    Model m = test::load(c.file);
    SolveReport via_lee =
        solve_lee(intervene_lee(derive_lee(m), c.spec), 32, 19, 1e-10);
    REQUIRE(via_lee.verdict == SolveVerdict::unique);
    std::vector<double> hard_point = via_lee.solutions.front().x;

    double prev = std::numeric_limits<double>::infinity();
    std::map<double, double> dist;
    for (double kappa : {10.0, 100.0, 1000.0}) {
      std::vector<double> x = soft_equilibrium(m, c.spec, kappa);
      dist[kappa] = dist_inf(x, hard_point);
      CHECK(dist[kappa] < prev);
      prev = dist[kappa];
    }
    CHECK(dist[1000.0] <= dist[10.0] / 10.0);
  }
}
