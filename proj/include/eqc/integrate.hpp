#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqc/model.hpp"

namespace eqc {

struct IntegrateSettings {
  double dt = 1e-3;
  double t_max = 1e3;
  double tol = 1e-8;               // convergence residual tolerance
  double divergence_guard = 1e12;  // |x| beyond this terminates as diverged
  int max_samples = 4096;          // recorded samples cap (plus final state)
};

enum class Termination { reached_t_max, converged, diverged, domain_violation };

const char* termination_name(Termination t);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<double> residuals;  // max_i |f_i| at each recorded sample
  Termination termination = Termination::reached_t_max;
  std::optional<double> first_domain_violation;  // diagnostic, never fatal
};

// Classic fixed-step RK4 from the model's initial state. Terminates early
// once the residual stays at or below tol over a trailing window of
// recorded samples (10 of them, at least 5% of the recording), or when a
// state coordinate exceeds the divergence guard or turns non-finite.
// Evaluation errors in the RHS propagate with the offending time.
Trajectory integrate(const Model& m, const IntegrateSettings& s = {});
Trajectory integrate(const Model& m, double t_max, double dt);
Trajectory integrate_from(const Model& m, std::vector<double> x0,
                          const IntegrateSettings& s = {});

enum class Verdict { converged, oscillatory, diverged, ambiguous };

const char* verdict_name(Verdict v);

struct SampleSummary {
  std::vector<double> x0;
  Verdict verdict = Verdict::ambiguous;
  double final_residual = 0.0;
  std::optional<std::vector<double>> limit;
};

struct EquilibriumReport {
  std::optional<std::vector<double>> point;  // X*
  double residual = 0.0;                     // max_i |f_i(X*)|
  Verdict verdict = Verdict::ambiguous;
  std::vector<std::complex<double>> jacobian_eigenvalues;  // optional
  int basin_samples = 0;
  int distinct_limits = 0;
  std::vector<double> residual_series;  // single-trajectory reports
  std::vector<SampleSummary> samples;   // probe reports
  std::vector<std::string> frozen;      // variables pinned during sampling
  std::vector<std::string> notes;

  bool stable_sampled() const {
    return verdict == Verdict::converged && distinct_limits == 1 &&
           basin_samples >= 1;
  }
  std::string stability_label() const {
    return stable_sampled() ? "stable (sampled)" : "not stable";
  }
};

// Verdict over one trajectory. Converged iff the residual stays at or
// below tol across the trailing window (5% of samples, at least 10);
// oscillatory iff the trailing residual exceeds tol but has not decayed
// below half of the mid-trajectory window maximum.
EquilibriumReport detect_equilibrium(const Trajectory& traj, const Model& m,
                                     double tol);

struct ProbeSettings {
  int n_samples = 16;
  unsigned seed = 1;
  double tol = 1e-8;
  double box_halfwidth = 5.0;  // sampling box [init-hw, init+hw] ∩ domain
  IntegrateSettings integrate;
};

// Definition-1 style stability probing by seeded sampling of initial
// states. Variables whose RHS is the literal 0 are held at their initial
// value (the intervened initial condition); limits of converged samples
// are clustered with radius 10*tol. The universal quantifier is only
// approximated, hence the "(sampled)" label.
EquilibriumReport probe_stability(const Model& m, const ProbeSettings& s = {});
EquilibriumReport probe_stability(const Model& m, int n_samples, unsigned seed,
                                  double tol);

struct WrtSettings {
  int xi_samples = 5;
  unsigned seed = 1;
  double box_halfwidth = 5.0;
  // optional explicit clamp-value range per member variable
  std::map<std::string, std::pair<double, double>> xi_range;
  ProbeSettings probe;
};

struct WrtDraw {
  std::map<std::string, double> xi;
  EquilibriumReport report;
};

struct WrtResult {
  std::vector<std::string> targets;
  std::vector<WrtDraw> draws;
  bool stable = false;  // every draw stable (sampled)
};

// Definition-2 style probing: for each target set, sample clamp values,
// hard-intervene, and probe stability of the intervened system.
std::vector<WrtResult> probe_stability_wrt(
    const Model& m, const std::vector<std::vector<std::string>>& family,
    const WrtSettings& s = {});

// Central finite differences, step max(1e-6, 1e-6*|x_j|) per column.
Eigen::MatrixXd jacobian(const Model& m, const std::vector<double>& x);
std::vector<std::complex<double>> jacobian_eigenvalues(
    const Model& m, const std::vector<double>& x);

}  // namespace eqc
